#include "raqmdp/mcts.h"

#include <limits>

namespace raqmdp {

void SearchConfig::validate(std::size_t num_actions) const {
  if (depth < 1) throw std::invalid_argument("search.depth must be >= 1");
  if (budget < static_cast<long>(num_actions)) {
    throw std::invalid_argument("search.budget must cover every action");
  }
  if (!(epsilon_root >= 0.0 && epsilon_root <= 1.0)) {
    throw std::invalid_argument("search.epsilon must lie in [0, 1]");
  }
  if (!(c_uct >= 0.0)) throw std::invalid_argument("search.c_uct must be >= 0");
  if (!(discount > 0.0 && discount <= 1.0)) {
    throw std::invalid_argument("search.discount must lie in (0, 1]");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("search.dt must be > 0");
}

std::size_t select_action_uct(const NodeStats& stats, double c) {
  if (stats.actions.empty()) throw std::invalid_argument("select_action_uct: no actions");
  for (std::size_t i = 0; i < stats.actions.size(); ++i) {
    if (stats.actions[i].visits == 0) return i;
  }
  const double log_n = std::log(static_cast<double>(std::max(stats.visits, 1L)));
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < stats.actions.size(); ++i) {
    const auto& a = stats.actions[i];
    const double value = a.q + c * std::sqrt(log_n / static_cast<double>(a.visits));
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  return best;
}

std::size_t select_action_root(const NodeStats& stats, double c, double epsilon,
                               Rng& rng) {
  if (stats.actions.empty()) throw std::invalid_argument("select_action_root: no actions");
  bool explore = epsilon >= 1.0;
  if (epsilon > 0.0 && epsilon < 1.0) {
    explore = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon;
  }
  if (!explore) return select_action_uct(stats, c);
  std::size_t best = 0;
  for (std::size_t i = 1; i < stats.actions.size(); ++i) {
    if (stats.actions[i].visits < stats.actions[best].visits) best = i;
  }
  return best;
}

}  // namespace raqmdp
