#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace raqmdp {

using Rng = std::mt19937_64;

// Deterministic generative model searched by the planner. Actions are listed
// per state; the rollout policy may return actions outside that list.
template <class M>
concept MdpInterface = requires(const M& m, const typename M::State& s,
                                const typename M::Action& a, Rng& rng) {
  typename M::State;
  typename M::Action;
  { m.actions(s) } -> std::convertible_to<std::vector<typename M::Action>>;
  { m.transition(s, a) } -> std::convertible_to<typename M::State>;
  { m.reward(s, a, s) } -> std::convertible_to<double>;
  { m.is_terminal(s) } -> std::convertible_to<bool>;
  { m.rollout_policy(s, rng) } -> std::convertible_to<typename M::Action>;
};

struct ActionStats {
  long visits = 0;
  double q = 0.0;  // running mean of backed-up returns
};

struct NodeStats {
  long visits = 0;
  std::vector<ActionStats> actions;
};

struct SearchConfig {
  int depth = 15;
  long budget = 20000;
  double c_uct = 1.0;
  double epsilon_root = 1.0;
  double discount = 1.0;
  double dt = 0.5;
  // Untried actions below the root are expanded in random order instead of
  // index order. This is the only source of search randomness besides the
  // root epsilon draw.
  bool randomize_untried = true;

  void validate(std::size_t num_actions = 1) const;
};

// argmax_a Q(s,a) + c * sqrt(ln N(s) / N(s,a)); untried actions first, lowest
// index on ties.
std::size_t select_action_uct(const NodeStats& stats, double c);

// With probability epsilon the least-tried action (lowest index on ties),
// otherwise select_action_uct. Draws from rng only when 0 < epsilon < 1.
std::size_t select_action_root(const NodeStats& stats, double c, double epsilon,
                               Rng& rng);

template <class Action>
struct SearchResult {
  std::vector<Action> actions;
  std::vector<double> q;
  std::vector<long> n;
  long root_visits = 0;
  std::size_t node_count = 0;
};

namespace detail {

template <class State, class Action>
struct Node {
  State state;
  std::vector<Action> actions;
  NodeStats stats;
  std::vector<int> child;  // -1: no node (unexpanded or at horizon)
  std::vector<double> edge_reward;
};

}  // namespace detail

template <MdpInterface M>
SearchResult<typename M::Action> search(const typename M::State& root_state,
                                        const M& mdp, const SearchConfig& cfg,
                                        Rng& rng) {
  using State = typename M::State;
  using Action = typename M::Action;
  using NodeT = detail::Node<State, Action>;

  if (cfg.budget < 1 || cfg.depth < 1) {
    throw std::invalid_argument("search: budget and depth must be >= 1");
  }

  std::vector<NodeT> nodes;
  nodes.reserve(static_cast<std::size_t>(cfg.budget) + 1);
  auto make_node = [&](State s) {
    NodeT node;
    node.actions = mdp.actions(s);
    node.state = std::move(s);
    const std::size_t k = node.actions.size();
    node.stats.actions.assign(k, ActionStats{});
    node.child.assign(k, -1);
    node.edge_reward.assign(k, 0.0);
    nodes.push_back(std::move(node));
    return static_cast<int>(nodes.size() - 1);
  };
  make_node(root_state);
  if (nodes[0].actions.empty()) throw std::invalid_argument("search: root has no actions");
  cfg.validate(nodes[0].actions.size());

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](const NodeT& node, int depth) -> std::size_t {
    const auto& st = node.stats;
    if (depth == 0) {
      const double eps = cfg.epsilon_root;
      bool explore = eps >= 1.0;
      if (eps > 0.0 && eps < 1.0) explore = unit(rng) < eps;
      if (explore) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < st.actions.size(); ++i) {
          if (st.actions[i].visits < st.actions[best].visits) best = i;
        }
        return best;
      }
    }
    if (cfg.randomize_untried) {
      std::size_t untried = 0;
      for (const auto& a : st.actions) untried += a.visits == 0 ? 1 : 0;
      if (untried > 0) {
        std::size_t k = std::uniform_int_distribution<std::size_t>(0, untried - 1)(rng);
        for (std::size_t i = 0; i < st.actions.size(); ++i) {
          if (st.actions[i].visits == 0 && k-- == 0) return i;
        }
      }
    }
    return select_action_uct(st, cfg.c_uct);
  };

  struct Step {
    int node;
    std::size_t action;
    double reward;
  };
  std::vector<Step> path;
  path.reserve(static_cast<std::size_t>(cfg.depth));

  for (long sim = 0; sim < cfg.budget; ++sim) {
    path.clear();
    int cur = 0;
    int depth = 0;
    double tail = 0.0;
    while (depth < cfg.depth && !mdp.is_terminal(nodes[cur].state)) {
      const std::size_t ai = pick(nodes[cur], depth);
      if (nodes[cur].child[ai] >= 0) {
        path.push_back({cur, ai, nodes[cur].edge_reward[ai]});
        cur = nodes[cur].child[ai];
        ++depth;
        continue;
      }
      // Leaf edge: simulate it, expand one node if the horizon allows, roll out.
      const Action action = nodes[cur].actions[ai];
      State next = mdp.transition(nodes[cur].state, action);
      const double r = mdp.reward(nodes[cur].state, action, next);
      path.push_back({cur, ai, r});
      ++depth;
      if (depth < cfg.depth && !mdp.is_terminal(next)) {
        double scale = 1.0;
        State s = next;
        for (int d = depth; d < cfg.depth && !mdp.is_terminal(s); ++d) {
          const Action ra = mdp.rollout_policy(s, rng);
          State s2 = mdp.transition(s, ra);
          tail += scale * mdp.reward(s, ra, s2);
          scale *= cfg.discount;
          s = std::move(s2);
        }
        const int id = make_node(std::move(next));
        nodes[cur].child[ai] = id;
        nodes[cur].edge_reward[ai] = r;
      }
      break;
    }
    double ret = tail;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      ret = it->reward + cfg.discount * ret;
      auto& st = nodes[it->node].stats;
      auto& as = st.actions[it->action];
      ++st.visits;
      ++as.visits;
      as.q += (ret - as.q) / static_cast<double>(as.visits);
    }
  }

  SearchResult<Action> result;
  const auto& root = nodes[0];
  result.actions = root.actions;
  for (const auto& a : root.stats.actions) {
    result.q.push_back(a.q);
    result.n.push_back(a.visits);
  }
  result.root_visits = root.stats.visits;
  result.node_count = nodes.size();
  return result;
}

}  // namespace raqmdp
