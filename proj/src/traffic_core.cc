#include "raqmdp/traffic_core.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

namespace raqmdp {

bool is_finite(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.vx) &&
         std::isfinite(s.vy) && std::isfinite(s.ax) && std::isfinite(s.ay);
}

const char* to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kVehicle:
      return "vehicle";
    case ObjectKind::kStationaryObject:
      return "stationary-object";
  }
  return "unknown";
}

const RoadObject* WorldState::find(int id) const {
  if (id == ego.id) return &ego;
  for (const auto& o : others) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

RoadObject* WorldState::find(int id) {
  return const_cast<RoadObject*>(std::as_const(*this).find(id));
}

void validate_world(const WorldState& world) {
  std::set<int> ids{world.ego.id};
  if (!is_finite(world.ego.state)) {
    throw std::invalid_argument("ego state is not finite");
  }
  for (const auto& o : world.others) {
    if (!ids.insert(o.id).second) {
      throw std::invalid_argument("duplicate object id " + std::to_string(o.id));
    }
    if (!is_finite(o.state)) {
      throw std::invalid_argument("object " + std::to_string(o.id) +
                                  " state is not finite");
    }
  }
}

bool RoadModel::has_lane(int id) const {
  return std::any_of(lanes.begin(), lanes.end(),
                     [id](const Lane& l) { return l.id == id; });
}

int RoadModel::effective_lane(int lane, double y, bool anticipate) const {
  if (!merge || lane != merge->from_lane) return lane;
  if (y >= merge->y - (anticipate ? merge->zone : 0.0)) return merge->into_lane;
  return lane;
}

void RoadModel::validate() const {
  if (lanes.empty()) throw std::invalid_argument("road has no lanes");
  for (const auto& l : lanes) {
    if (!(l.width > 0.0)) {
      throw std::invalid_argument("lane " + std::to_string(l.id) +
                                  " width must be positive");
    }
  }
  if (merge) {
    if (!has_lane(merge->from_lane) || !has_lane(merge->into_lane) ||
        merge->from_lane == merge->into_lane) {
      throw std::invalid_argument("merge point must join two existing lanes");
    }
    if (!(merge->zone >= 0.0)) throw std::invalid_argument("merge zone must be >= 0");
    if (!std::isfinite(merge->y) || !std::isfinite(merge->zone)) {
      throw std::invalid_argument("merge point is not finite");
    }
  }
}

VehicleState step_kinematics(const VehicleState& s, double accel, double dt,
                             double v_cap) {
  if (!is_finite(s) || !std::isfinite(accel) || !std::isfinite(dt)) {
    throw std::invalid_argument("step_kinematics: non-finite input");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("step_kinematics: dt must be > 0");

  VehicleState next = s;
  // A vehicle at rest cannot decelerate further.
  next.ay = (s.vy <= 0.0 && accel < 0.0) ? 0.0 : accel;
  advance_longitudinal(next.y, next.vy, accel, dt, v_cap);
  return next;
}

std::optional<LeadGap> gap_to_lead(const WorldState& world, int follower_id,
                                   const RoadModel& road, bool anticipate) {
  const RoadObject* follower = world.find(follower_id);
  if (follower == nullptr) {
    throw std::invalid_argument("gap_to_lead: unknown follower " +
                                std::to_string(follower_id));
  }
  const double fy = follower->state.y;
  const int lane = road.effective_lane(follower->lane, fy, anticipate);

  std::optional<LeadGap> best;
  auto consider = [&](const RoadObject& o) {
    if (o.id == follower_id) return;
    if (road.effective_lane(o.lane, o.state.y, anticipate) != lane) return;
    if (!(o.state.y > fy)) return;
    const double d = o.state.y - o.length - fy;
    if (!best || d < best->distance) best = LeadGap{o.id, d, o.state.vy};
  };
  consider(world.ego);
  for (const auto& o : world.others) consider(o);
  return best;
}

}  // namespace raqmdp
