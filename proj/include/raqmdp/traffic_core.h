#pragma once

#include <optional>
#include <string>
#include <vector>

namespace raqmdp {

// Physical plausibility cap on longitudinal speed (m/s).
inline constexpr double kMaxSpeed = 70.0;
inline constexpr double kDefaultVehicleLength = 5.0;

// Kinematic state of one road object. x is lateral, y longitudinal; y marks
// the front bumper.
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double ax = 0.0;
  double ay = 0.0;

  bool operator==(const VehicleState&) const = default;
};

bool is_finite(const VehicleState& s);

enum class ObjectKind { kVehicle, kStationaryObject };

const char* to_string(ObjectKind kind);

// Id 0 is reserved for the ego vehicle.
inline constexpr int kEgoId = 0;

struct RoadObject {
  int id = kEgoId;
  VehicleState state;
  ObjectKind kind = ObjectKind::kVehicle;
  int lane = 0;
  double length = kDefaultVehicleLength;

  bool operator==(const RoadObject&) const = default;
};

struct WorldState {
  RoadObject ego;
  std::vector<RoadObject> others;
  double time = 0.0;

  const RoadObject* find(int id) const;
  RoadObject* find(int id);
  bool operator==(const WorldState&) const = default;
};

// Throws std::invalid_argument on duplicate ids or non-finite states.
void validate_world(const WorldState& world);

struct Lane {
  int id = 0;
  double centerline_offset = 0.0;
  double width = 3.7;
};

// A ramp lane `from_lane` that becomes part of `into_lane` at longitudinal
// coordinate `y`. Planners may anticipate the merge: a ramp object within
// `zone` metres before y is then treated as already in `into_lane`.
struct MergePoint {
  double y = 0.0;
  int from_lane = 1;
  int into_lane = 0;
  double zone = 0.0;
};

struct RoadModel {
  std::vector<Lane> lanes{Lane{}};
  std::optional<MergePoint> merge;

  bool has_lane(int id) const;
  // Lane an object on `lane` occupies at longitudinal position y, accounting
  // for the merge (and its anticipation zone when `anticipate`).
  int effective_lane(int lane, double y, bool anticipate = false) const;
  void validate() const;
};

// Longitudinal part of step_kinematics without validation; used on hot paths.
inline void advance_longitudinal(double& y, double& v, double accel, double dt,
                                 double v_cap = kMaxSpeed) {
  const double v_end = v + accel * dt;
  if (v_end < 0.0) {
    const double v0 = v > 0.0 ? v : 0.0;
    y += v0 * v0 / (-2.0 * accel);
    v = 0.0;
  } else if (v_end > v_cap) {
    const double v0 = v < v_cap ? v : v_cap;
    const double t_cap = accel > 0.0 ? (v_cap - v0) / accel : 0.0;
    y += v0 * t_cap + 0.5 * accel * t_cap * t_cap + v_cap * (dt - t_cap);
    v = v_cap;
  } else {
    y += v * dt + 0.5 * accel * dt * dt;
    v = v_end;
  }
}

// Constant-acceleration update over dt. Speed is clamped to [0, v_cap]; a
// vehicle that would reverse stops where its speed reaches zero.
VehicleState step_kinematics(const VehicleState& s, double accel, double dt,
                             double v_cap = kMaxSpeed);

struct LeadGap {
  int lead_id = 0;
  double distance = 0.0;  // bumper to bumper, may be <= 0 on contact
  double velocity = 0.0;
};

// Nearest object strictly ahead of `follower_id` in the same effective lane.
std::optional<LeadGap> gap_to_lead(const WorldState& world, int follower_id,
                                   const RoadModel& road, bool anticipate = false);

}  // namespace raqmdp
