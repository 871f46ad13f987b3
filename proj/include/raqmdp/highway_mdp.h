#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "raqmdp/idm.h"
#include "raqmdp/mcts.h"
#include "raqmdp/traffic_core.h"

namespace raqmdp {

enum class HighLevelAction { kLaneKeep };

// A behaviour-planner decision: a high-level manoeuvre plus the longitudinal
// acceleration interval the motion planner must respect.
struct BpAction {
  HighLevelAction kind = HighLevelAction::kLaneKeep;
  AccelBounds accel;

  bool operator==(const BpAction&) const = default;
};

std::string to_string(const BpAction& a);

// LaneKeep with [-8,-2], [-2,-1], [-1,0], [0,1], [1,2].
std::vector<BpAction> default_lane_keep_actions();

// Rollout behaviour: IDM restricted to [-8, 0].
inline constexpr AccelBounds kRolloutBounds{-8.0, 0.0};

struct CostWeights {
  double closeness = 3000.0;
  double crash = 1000.0;
  double hard_brake = 2.0;
  double jerk = 0.02;
  double velocity = 10.0;

  void validate() const;
};

// Constant deceleration (negative) that brings a closing follower to rest
// relative to its lead at gap s0; +inf when not closing.
double required_decel(double v, const LeadInfo& lead, const IdmParams& p);

// Upper bound the MP places on acceleration behind `lead`: a_max when not
// closing, falling linearly to -b_safe as required_decel reaches -b_safe,
// and required_decel beyond that. -b_max at or past contact.
double override_cap(double v, const LeadInfo& lead, const IdmParams& p);

// Motion-planner acceleration: IDM clamped into the BP interval, never
// positive at or above v_desired. With
// `safety_override`, the result is capped by override_cap. Always within [-b_max, a_max].
double mp_accel(double v, const std::optional<LeadInfo>& lead, const AccelBounds& action,
                const IdmParams& p, bool safety_override = true);

// First-order actuator response over a step h: the applied acceleration moves
// toward the command with time constant `lag` (lag <= h applies it at once).
double lagged_accel(double applied, double command, double h, double lag);

// One MP tick. The command is mp_accel without override on `planning_lead`
// (which may anticipate a merge), passed through the actuator lag. The
// result is then capped by the override on `physical_lead`; the cap acts
// immediately.
double mp_tick_accel(double v, double applied, const std::optional<LeadInfo>& planning_lead,
                     const std::optional<LeadInfo>& physical_lead, const AccelBounds& action,
                     const IdmParams& p, double h, double lag);

// Contact test between a follower and its lead: gap <= 0 while closing, or
// any actual overlap.
bool is_crash(double gap, double follower_v, double lead_v);

inline constexpr int kMaxTreeObjects = 4;

// Compact world used inside the tree search.
struct TreeState {
  struct Object {
    double y = 0.0;
    double v = 0.0;
    double length = kDefaultVehicleLength;
    int lane = 0;
  };
  double ego_y = 0.0;
  double ego_v = 0.0;
  double ego_a = 0.0;
  double ego_length = kDefaultVehicleLength;
  int ego_lane = 0;
  std::array<Object, kMaxTreeObjects> others{};
  int num_others = 0;
  double step_cost = 0.0;  // cost of the transition that produced this state
  bool crashed = false;
};

// Per-sample MDP: the ego follows the MP rule for the chosen interval, every
// other object keeps its current velocity. Rewards are negated costs. The ego
// anticipates the merge (car following and closeness costs); contact is
// judged on the physical lanes.
class HighwayMdp {
 public:
  using State = TreeState;
  using Action = BpAction;

  HighwayMdp(const WorldState& world, RoadModel road, IdmParams idm, CostWeights cost,
             std::vector<BpAction> actions, double dt, int substeps = 10,
             double accel_lag = 0.0);

  const State& initial_state() const { return initial_; }
  std::vector<Action> actions(const State&) const { return actions_; }
  State transition(const State& s, const Action& a) const;
  double reward(const State&, const Action&, const State& next) const {
    return -next.step_cost;
  }
  bool is_terminal(const State& s) const { return s.crashed; }
  Action rollout_policy(const State&, Rng&) const {
    return BpAction{HighLevelAction::kLaneKeep, kRolloutBounds};
  }

  struct Neighbours {
    std::optional<LeadInfo> lead;
    std::optional<LeadInfo> follower;  // gap measured from follower to ego
    double follower_v = 0.0;
  };
  // With `anticipate`, ramp objects inside the merge zone count as neighbours.
  Neighbours neighbours(const State& s, bool anticipate = false) const;
  // w_crash * (1 + (closing / v_desired)^2)
  double crash_cost(double closing_speed) const;

 private:
  State initial_;
  RoadModel road_;
  IdmParams idm_;
  CostWeights cost_;
  std::vector<BpAction> actions_;
  double dt_;
  int substeps_;
  double accel_lag_;
};

}  // namespace raqmdp
