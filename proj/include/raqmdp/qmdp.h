#pragma once

#include <cstdint>
#include <future>
#include <span>
#include <stdexcept>
#include <vector>

#include "raqmdp/belief.h"
#include "raqmdp/mcts.h"

namespace raqmdp {

// Q_MDP(x_i, a) for every action at one weighted sample.
struct PointQ {
  double weight = 0.0;
  std::vector<double> q;
};

struct ActionEstimate {
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> point_q;  // aligned with QmdpEstimate::weights
};

struct QmdpEstimate {
  std::vector<double> weights;
  std::vector<ActionEstimate> actions;
};

struct RiskConfig {
  double alpha = 0.01;

  void validate() const;
};

// Weighted mean and weighted population variance of each action's Q across
// the samples. Summation runs in a canonical order, so the result does not
// depend on the order of `results`.
QmdpEstimate aggregate(std::span<const PointQ> results);

// argmax_a mean(a) - alpha * variance(a), lowest index on ties.
std::size_t select_risk_averse(const QmdpEstimate& est, const RiskConfig& cfg);

// Splits a query budget evenly over `points` samples; the remainder goes to
// the first one (the centre point).
std::vector<long> split_budget(long total, std::size_t points);

// SplitMix64 step, used to derive independent per-search seeds.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

template <class Action>
struct QmdpDecision {
  QmdpEstimate estimate;
  std::size_t chosen = 0;
  std::vector<SearchResult<Action>> per_point;
};

// Runs one tree search per sigma point (concurrently when `parallel`),
// aggregates the root Q tables and applies the risk-averse rule.
template <class MdpFactory>
auto plan_qmdp(const SigmaPointSet& points, const MdpFactory& make_mdp,
               const SearchConfig& search_cfg, const RiskConfig& risk,
               std::uint64_t seed, bool parallel = true) {
  using Mdp = decltype(make_mdp(points.points.front().world));
  using Action = typename Mdp::Action;
  if (points.points.empty()) throw std::invalid_argument("plan_qmdp: no sigma points");

  const auto budgets = split_budget(search_cfg.budget, points.points.size());
  auto run_one = [&](std::size_t i) {
    const Mdp mdp = make_mdp(points.points[i].world);
    SearchConfig cfg = search_cfg;
    cfg.budget = budgets[i];
    Rng rng(derive_seed(seed, i));
    return search(mdp.initial_state(), mdp, cfg, rng);
  };

  QmdpDecision<Action> decision;
  if (parallel && points.points.size() > 1) {
    std::vector<std::future<SearchResult<Action>>> jobs;
    for (std::size_t i = 0; i < points.points.size(); ++i) {
      jobs.push_back(std::async(std::launch::async, run_one, i));
    }
    for (auto& j : jobs) decision.per_point.push_back(j.get());
  } else {
    for (std::size_t i = 0; i < points.points.size(); ++i) {
      decision.per_point.push_back(run_one(i));
    }
  }

  std::vector<PointQ> tables;
  for (std::size_t i = 0; i < points.points.size(); ++i) {
    tables.push_back(PointQ{points.points[i].weight, decision.per_point[i].q});
  }
  decision.estimate = aggregate(tables);
  decision.chosen = select_risk_averse(decision.estimate, risk);
  return decision;
}

}  // namespace raqmdp
