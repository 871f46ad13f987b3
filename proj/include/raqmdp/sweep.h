#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "raqmdp/config.h"

namespace raqmdp {

enum class SweepParameter { kAlpha, kEpsilon, kSensorRange, kPlanner };
const char* to_string(SweepParameter p);
std::optional<SweepParameter> parse_sweep_parameter(const std::string& s);

// Sweep file format (same syntax as scenario files):
//
//   [sweep]
//   parameter = alpha                # alpha | epsilon | sensor-range | planner
//   values = 0, 0.01, 0.1
//   seeds = 1-10                     # list and/or inclusive ranges
//   scenario = scenario1.ini         # relative to the sweep file
//   sensor_ranges = 60, 80, 100      # optional second axis
struct SweepSpec {
  SweepParameter parameter = SweepParameter::kAlpha;
  std::vector<std::string> values;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path scenario;
  std::vector<double> sensor_ranges;

  void validate() const;
};

SweepSpec parse_sweep_spec(std::istream& in, const std::string& source,
                           const std::filesystem::path& base_dir);
SweepSpec load_sweep_spec(const std::filesystem::path& path);

struct EpisodeOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  EpisodeSummary summary;
};

struct CellResult {
  std::string value;
  std::optional<double> sensor_range;
  ExperimentConfig config;
  std::vector<EpisodeOutcome> episodes;  // in seed order

  std::size_t completed() const;
  std::size_t crashes() const;
  // Means over completed episodes; NaN when none completed.
  double avg_velocity() const;
  double max_abs_jerk() const;
  double worst_abs_jerk() const;
};

struct SweepResult {
  SweepParameter parameter = SweepParameter::kAlpha;
  std::vector<CellResult> cells;  // values major, sensor ranges minor
};

// Configuration of one cell; throws ConfigError for values that do not parse
// or do not apply to the scenario.
ExperimentConfig cell_config(const ExperimentConfig& base, const SweepSpec& spec,
                             std::size_t value_index, std::optional<double> sensor_range);

// Runs every (cell, seed) episode on `parallel` worker threads. Episode
// failures are recorded in the cell. When `out_dir` is non-empty, each
// episode record is written there atomically as it completes.
SweepResult run_sweep(const SweepSpec& spec, const ExperimentConfig& base, int parallel,
                      const std::filesystem::path& out_dir = {});

nlohmann::json sweep_json(const SweepResult& r);

// One row per cell: alpha, epsilon, planner, sensor_range, episodes,
// failures, crashes, avg_velocity, safe_distance, max_abs_jerk. The
// safe_distance column is s*(avg_velocity, 0) under the cell's IDM.
std::string sweep_table_csv(const SweepResult& r);

// Velocity versus max |jerk| scatter of the cells at one sensor range (all
// cells when `sensor_range` is empty).
std::string scatter_svg(const SweepResult& r, std::optional<double> sensor_range);

// summary.json, table.csv and the scatter plots.
void write_sweep_outputs(const SweepResult& r, const std::filesystem::path& out_dir);

}  // namespace raqmdp
