#pragma once

#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "raqmdp/simulator.h"

namespace raqmdp {

// Scenario file format:
//
//   # comment
//   [section]
//   key = value   ; trailing comments start with '#' or ';'
//
// Sections and keys:
//   scenario:        kind (stationary-object | ramp-merge), duration, seed
//   planner:         kind (ra-qmdp | mcts-p0 | mcts-p1 | mcts-genie | mcts-noisy),
//                    alpha, w0, closeness_epsilon, substeps, parallel
//   search:          depth, budget, c_uct, epsilon, discount, dt, randomize_untried
//   idm:             s0, rho, v_desired, a_max, b_safe, b_max
//   cost:            closeness, crash, hard_brake, jerk, velocity
//   road:            lane_width, merge_y, merge_zone, vehicle_length
//   ego:             y, v, accel_lag
//   object:          y
//   merging_vehicle: y, v
//   sensor:          kind (limited-range | velocity-noise), range, width,
//                    probability_at_range, probability_inside, sigma0, tau,
//                    visibility
//
// Unset keys take ScenarioConfig::defaults(scenario.kind). Booleans are
// true/false. Every key may appear at most once.
struct ExperimentConfig {
  ScenarioConfig scenario;
  PlannerConfig planner;
};

// Message is "source:line: text", or "source: text" when no line applies.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IniEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

// Syntax pass shared by all config files: sections, `key = value`, comments.
// Rejects keys outside a section and empty values.
std::vector<IniEntry> read_ini(std::istream& in, const std::string& source);

// "source:line: msg", or "source: msg" for line <= 0.
std::string located(const std::string& source, int line, const std::string& msg);

ExperimentConfig parse_config(std::istream& in, const std::string& source = "<input>");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace raqmdp
