#include "raqmdp/highway_mdp.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace raqmdp {

std::string to_string(const BpAction& a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "LaneKeep[%g,%g]", a.accel.lo, a.accel.hi);
  return buf;
}

std::vector<BpAction> default_lane_keep_actions() {
  std::vector<BpAction> out;
  for (auto [lo, hi] : {std::pair{-8.0, -2.0}, {-2.0, -1.0}, {-1.0, 0.0}, {0.0, 1.0},
                        {1.0, 2.0}}) {
    out.push_back(BpAction{HighLevelAction::kLaneKeep, AccelBounds{lo, hi}});
  }
  return out;
}

void CostWeights::validate() const {
  const std::pair<const char*, double> fields[] = {{"closeness", closeness},
                                                   {"crash", crash},
                                                   {"hard_brake", hard_brake},
                                                   {"jerk", jerk},
                                                   {"velocity", velocity}};
  for (const auto& [name, w] : fields) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument(std::string("cost.") + name + " must be finite and >= 0");
    }
  }
  if (closeness + crash + hard_brake + jerk + velocity <= 0.0) {
    throw std::invalid_argument("cost weights must not all be zero");
  }
}

double required_decel(double v, const LeadInfo& lead, const IdmParams& p) {
  const double v_lead = std::max(lead.velocity, 0.0);
  if (v <= v_lead) return std::numeric_limits<double>::infinity();
  const double room = lead.gap - p.s0;
  if (room <= 0.0) return -p.b_max;
  return -(v * v - v_lead * v_lead) / (2.0 * room);
}

double override_cap(double v, const LeadInfo& lead, const IdmParams& p) {
  if (lead.gap <= 0.0) return -p.b_max;
  const double r = required_decel(v, lead, p);
  if (std::isinf(r)) return r;
  return std::max(r, p.a_max + r * (p.a_max + p.b_safe) / p.b_safe);
}

double mp_accel(double v, const std::optional<LeadInfo>& lead, const AccelBounds& action,
                const IdmParams& p, bool safety_override) {
  if (lead && lead->gap <= 0.0) return -p.b_max;
  const double raw = idm_accel_unclamped(v, lead, p);
  double a = std::clamp(raw, action.lo, std::max(action.lo, action.hi));
  if (v >= p.v_desired) a = std::min(a, 0.0);
  if (safety_override && lead) a = std::min(a, override_cap(v, *lead, p));
  return std::clamp(a, -p.b_max, p.a_max);
}

double lagged_accel(double applied, double command, double h, double lag) {
  if (lag <= h) return command;
  return applied + (command - applied) * (h / lag);
}

double mp_tick_accel(double v, double applied, const std::optional<LeadInfo>& planning_lead,
                     const std::optional<LeadInfo>& physical_lead, const AccelBounds& action,
                     const IdmParams& p, double h, double lag) {
  double a = lagged_accel(applied, mp_accel(v, planning_lead, action, p, false), h, lag);
  if (physical_lead) a = std::min(a, override_cap(v, *physical_lead, p));
  return std::clamp(a, -p.b_max, p.a_max);
}

bool is_crash(double gap, double follower_v, double lead_v) {
  return gap < 0.0 || (gap <= 0.0 && follower_v > lead_v);
}

HighwayMdp::HighwayMdp(const WorldState& world, RoadModel road, IdmParams idm,
                       CostWeights cost, std::vector<BpAction> actions, double dt,
                       int substeps, double accel_lag)
    : road_(std::move(road)),
      idm_(idm),
      cost_(cost),
      actions_(std::move(actions)),
      dt_(dt),
      substeps_(substeps),
      accel_lag_(accel_lag) {
  if (world.others.size() > static_cast<std::size_t>(kMaxTreeObjects)) {
    throw std::invalid_argument("HighwayMdp: too many road objects");
  }
  if (!(dt > 0.0) || substeps < 1 || !(accel_lag >= 0.0)) {
    throw std::invalid_argument("HighwayMdp: bad step");
  }
  initial_.ego_y = world.ego.state.y;
  initial_.ego_v = world.ego.state.vy;
  initial_.ego_a = world.ego.state.ay;
  initial_.ego_length = world.ego.length;
  initial_.ego_lane = world.ego.lane;
  for (const auto& o : world.others) {
    initial_.others[initial_.num_others++] =
        TreeState::Object{o.state.y, o.state.vy, o.length, o.lane};
  }
}

HighwayMdp::Neighbours HighwayMdp::neighbours(const State& s, bool anticipate) const {
  Neighbours nb;
  const int lane = road_.effective_lane(s.ego_lane, s.ego_y, anticipate);
  double best_ahead = 0.0;
  double best_behind = 0.0;
  for (int i = 0; i < s.num_others; ++i) {
    const auto& o = s.others[i];
    if (road_.effective_lane(o.lane, o.y, anticipate) != lane) continue;
    if (o.y > s.ego_y) {
      const double gap = o.y - o.length - s.ego_y;
      if (!nb.lead || gap < best_ahead) {
        best_ahead = gap;
        nb.lead = LeadInfo{gap, o.v};
      }
    } else {
      const double gap = s.ego_y - s.ego_length - o.y;
      if (!nb.follower || gap < best_behind) {
        best_behind = gap;
        nb.follower = LeadInfo{gap, s.ego_v};
        nb.follower_v = o.v;
      }
    }
  }
  return nb;
}

double HighwayMdp::crash_cost(double closing_speed) const {
  const double r = closing_speed / idm_.v_desired;
  return cost_.crash * (1.0 + r * r);
}

TreeState HighwayMdp::transition(const State& s, const Action& action) const {
  State next = s;
  next.step_cost = 0.0;
  const double h = dt_ / substeps_;
  const double vd = idm_.v_desired;
  for (int k = 0; k < substeps_ && !next.crashed; ++k) {
    const auto before = neighbours(next, true);
    double a = lagged_accel(next.ego_a, mp_accel(next.ego_v, before.lead, action.accel, idm_, false),
                            h, accel_lag_);
    if (next.ego_v <= 0.0 && a < 0.0) a = 0.0;
    const double jerk = (a - next.ego_a) / h;
    advance_longitudinal(next.ego_y, next.ego_v, a, h);
    next.ego_a = a;
    for (int i = 0; i < next.num_others; ++i) next.others[i].y += next.others[i].v * h;

    const double dv = (next.ego_v - vd) / vd;
    const double brake = std::max(0.0, -a - idm_.b_safe);
    double cost = cost_.velocity * dv * dv + cost_.jerk * jerk * jerk +
                  cost_.hard_brake * brake * brake;

    const auto near = neighbours(next, true);
    if (near.lead) {
      const double s_star =
          safe_distance(next.ego_v, std::max(near.lead->velocity, 0.0), idm_);
      const double short_fall = std::max(0.0, s_star - near.lead->gap) / s_star;
      cost += cost_.closeness * short_fall * short_fall;
    }
    if (near.follower) {
      const double s_star = safe_distance(near.follower_v, next.ego_v, idm_);
      const double short_fall = std::max(0.0, s_star - near.follower->gap) / s_star;
      cost += cost_.closeness * short_fall * short_fall;
    }
    const auto nb = neighbours(next);
    if (nb.lead && is_crash(nb.lead->gap, next.ego_v, nb.lead->velocity)) {
      next.step_cost += crash_cost(std::max(0.0, next.ego_v - nb.lead->velocity));
      next.crashed = true;
    } else if (nb.follower && is_crash(nb.follower->gap, nb.follower_v, next.ego_v)) {
      next.step_cost += crash_cost(std::max(0.0, nb.follower_v - next.ego_v));
      next.crashed = true;
    }
    next.step_cost += cost * h;
  }
  return next;
}

}  // namespace raqmdp
