#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "raqmdp/belief.h"
#include "raqmdp/highway_mdp.h"
#include "raqmdp/idm.h"
#include "raqmdp/mcts.h"
#include "raqmdp/qmdp.h"
#include "raqmdp/traffic_core.h"

namespace raqmdp {

inline constexpr double kBpPeriod = 0.5;
inline constexpr double kMpPeriod = 0.05;
inline constexpr int kMpTicksPerBp = 10;

enum class ScenarioKind { kStationaryObject, kRampMerge };
enum class PlannerKind { kRaQmdp, kMctsP0, kMctsP1, kMctsGenie, kMctsNoisy };

const char* to_string(ScenarioKind k);
const char* to_string(PlannerKind k);
std::optional<ScenarioKind> parse_scenario_kind(const std::string& s);
std::optional<PlannerKind> parse_planner_kind(const std::string& s);

// Detection of a stationary object at bumper-to-bumper distance d follows a
// logistic curve with p(range) = probability_at_range and
// p(range - width) = probability_inside. Evaluated once per MP tick.
struct LimitedRangeSensor {
  double range = 60.0;
  double width = 1.0;
  double probability_at_range = 0.1;
  double probability_inside = 0.99;

  double detection_probability(double distance) const;
  void validate() const;
};

// Noise on the merging vehicle's longitudinal speed with standard deviation
// sigma0 * exp(-t / tau), t being the tracking time. Tracking starts once the
// ego is within `visibility` metres of the merge point; before that the
// planner does not know about the merging vehicle.
struct VelocityNoiseSensor {
  double sigma0 = 4.0;
  double tau = 3.0;
  double visibility = 150.0;

  double sigma(double tracking_time) const;
  void validate() const;
};

using SensorModel = std::variant<LimitedRangeSensor, VelocityNoiseSensor>;

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kStationaryObject;
  double duration = 60.0;
  std::uint64_t seed = 1;
  IdmParams idm;
  CostWeights cost;
  double lane_width = 3.7;
  double merge_y = 300.0;
  double merge_zone = 100.0;
  double ego_y = 0.0;
  double ego_v = 29.17;
  double accel_lag = 0.5;  // actuator time constant (s)
  double object_y = 400.0;
  double mv_y = 0.0;
  double mv_v = 20.0;
  double vehicle_length = kDefaultVehicleLength;
  SensorModel sensor = LimitedRangeSensor{};

  RoadModel road() const;
  WorldState initial_world() const;
  void validate() const;

  // Defaults for a scenario: stationary object with a 60 m range sensor, or
  // ramp merge with both vehicles at 20 m/s and velocity noise.
  static ScenarioConfig defaults(ScenarioKind kind);
};

struct PlannerConfig {
  PlannerKind kind = PlannerKind::kRaQmdp;
  RiskConfig risk;
  SearchConfig search;
  double w0 = 0.5;
  double closeness_epsilon = 1e-3;
  int substeps = 10;
  bool parallel = true;

  void validate(ScenarioKind scenario) const;
};

inline constexpr int kObjectId = 1;  // stationary object (scenario 1)
inline constexpr int kMergingId = 1;  // merging vehicle (scenario 2)

// Two-hypothesis belief for an undetected object: present at the sensor range
// ahead of the ego (probability_at_range) or absent. `visible` must not
// contain the undetected object.
BeliefState scenario1_belief(const WorldState& visible, const LimitedRangeSensor& sensor);

// World with a hypothetical stationary object at the sensor range.
WorldState with_object_at_range(const WorldState& visible, const LimitedRangeSensor& sensor);

struct VelocityMeasurement {
  double mean = 0.0;
  double sigma = 0.0;
};

// The tracker error is one standard-normal draw `z` per episode, scaled by
// sigma(t): measurements start off by sigma0 * z and converge to the truth.
VelocityMeasurement measure_velocity(double true_velocity, double tracking_time,
                                     const VelocityNoiseSensor& sensor, double z);

// The z used by run_episode for `seed`.
double tracking_error_draw(std::uint64_t seed);

// One-dimensional Gaussian on the merging vehicle's speed.
BeliefState scenario2_belief(const WorldState& truth, const VelocityMeasurement& m);

struct TickRecord {
  double time = 0.0;
  double ego_y = 0.0;
  double ego_vy = 0.0;
  double ego_ay = 0.0;
  double jerk = 0.0;
  std::optional<double> gap;
  std::optional<double> headway;
};

struct BpRecord {
  double time = 0.0;
  std::size_t action = 0;
  std::vector<double> q_mean;
  std::vector<double> q_variance;
  std::size_t sigma_points = 0;
  std::vector<long> root_visits;
};

struct MergeSnapshot {
  double time = 0.0;
  double ego_y = 0.0;
  double ego_v = 0.0;
  double mv_y = 0.0;
  double mv_v = 0.0;
  bool mv_ahead = false;
  double distance = 0.0;  // bumper to bumper, lead minus follower
  double headway = 0.0;   // distance / follower speed
};

enum class EndReason { kDuration, kCrash, kStopped };
const char* to_string(EndReason r);

struct EpisodeSummary {
  double avg_velocity = 0.0;  // pre-detection cruise (scenario 1) or whole episode
  double avg_velocity_episode = 0.0;
  double max_abs_jerk = 0.0;
  bool crash = false;
  std::optional<double> detection_time;
  std::optional<double> detection_distance;
  std::optional<double> min_gap;
  std::optional<MergeSnapshot> merge;
  EndReason end = EndReason::kDuration;
};

struct Telemetry {
  std::vector<TickRecord> ticks;
  std::vector<BpRecord> decisions;
  EpisodeSummary summary;
};

struct EpisodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Closed-loop episode: BP every 0.5 s, MP and world every 0.05 s.
// Deterministic in (scenario, planner, seed).
Telemetry run_episode(const ScenarioConfig& scenario, const PlannerConfig& planner,
                      std::uint64_t seed);

// Single BP decision for a belief; exposed for analysis tools and tests.
QmdpDecision<BpAction> plan_decision(const BeliefState& belief, const ScenarioConfig& scenario,
                                     const PlannerConfig& planner, std::uint64_t seed,
                                     std::size_t* sigma_count = nullptr);

}  // namespace raqmdp
