#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include <json.hpp>

#include "raqmdp/simulator.h"

namespace raqmdp {

// Column order of the per-tick CSV.
inline constexpr const char* kTickCsvHeader = "time,ego_y,ego_vy,ego_ay,jerk,gap,headway";

// One row per MP tick, fixed-point with six decimals; missing gap/headway are
// empty fields. Output depends only on the records.
void write_ticks_csv(std::ostream& out, const Telemetry& tel);
std::string ticks_csv(const Telemetry& tel);

// One row per BP decision: time, chosen action, sigma-point count, then
// q_mean/q_variance/visits per action.
std::string decisions_csv(const Telemetry& tel);

nlohmann::json summary_json(const EpisodeSummary& s);

// Episode record: configuration echo plus summary.
nlohmann::json episode_json(const ScenarioConfig& scenario, const PlannerConfig& planner,
                            std::uint64_t seed, const EpisodeSummary& s);

// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace raqmdp
