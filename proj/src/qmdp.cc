#include "raqmdp/qmdp.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace raqmdp {

void RiskConfig::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw std::invalid_argument("planner.alpha must be finite and >= 0");
  }
}

QmdpEstimate aggregate(std::span<const PointQ> results) {
  if (results.empty()) throw std::invalid_argument("aggregate: no results");
  const std::size_t num_actions = results.front().q.size();
  double total = 0.0;
  for (const auto& r : results) {
    if (r.q.size() != num_actions) {
      throw std::invalid_argument("aggregate: mismatched action sets");
    }
    total += r.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("aggregate: weights do not sum to 1");
  }

  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (results[a].weight != results[b].weight) return results[a].weight < results[b].weight;
    return results[a].q < results[b].q;
  });

  QmdpEstimate est;
  for (const auto& r : results) est.weights.push_back(r.weight);
  est.actions.resize(num_actions);
  for (std::size_t a = 0; a < num_actions; ++a) {
    auto& ae = est.actions[a];
    for (const auto& r : results) ae.point_q.push_back(r.q[a]);
    double mean = 0.0;
    for (std::size_t i : order) mean += results[i].weight * results[i].q[a];
    double var = 0.0;
    for (std::size_t i : order) {
      const double d = results[i].q[a] - mean;
      var += results[i].weight * d * d;
    }
    ae.mean = mean;
    ae.variance = std::max(var, 0.0);
  }
  return est;
}

std::size_t select_risk_averse(const QmdpEstimate& est, const RiskConfig& cfg) {
  if (est.actions.empty()) throw std::invalid_argument("select_risk_averse: empty estimate");
  std::size_t best = 0;
  double best_value = est.actions[0].mean - cfg.alpha * est.actions[0].variance;
  for (std::size_t a = 1; a < est.actions.size(); ++a) {
    const double v = est.actions[a].mean - cfg.alpha * est.actions[a].variance;
    if (v > best_value) {
      best_value = v;
      best = a;
    }
  }
  return best;
}

std::vector<long> split_budget(long total, std::size_t points) {
  if (points == 0) throw std::invalid_argument("split_budget: no points");
  const long n = static_cast<long>(points);
  std::vector<long> out(points, total / n);
  out[0] += total % n;
  return out;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace raqmdp
