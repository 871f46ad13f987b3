#include "raqmdp/telemetry_io.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace raqmdp {

namespace {

void put(std::string& line, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  line += buf;
}

void put(std::string& line, const std::optional<double>& v) {
  if (v) put(line, *v);
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void write_ticks_csv(std::ostream& out, const Telemetry& tel) {
  out << kTickCsvHeader << '\n';
  std::string line;
  for (const auto& r : tel.ticks) {
    line.clear();
    put(line, r.time);
    line += ',';
    put(line, r.ego_y);
    line += ',';
    put(line, r.ego_vy);
    line += ',';
    put(line, r.ego_ay);
    line += ',';
    put(line, r.jerk);
    line += ',';
    put(line, r.gap);
    line += ',';
    put(line, r.headway);
    line += '\n';
    out << line;
  }
}

std::string ticks_csv(const Telemetry& tel) {
  std::ostringstream out;
  write_ticks_csv(out, tel);
  return out.str();
}

std::string decisions_csv(const Telemetry& tel) {
  std::string out = "time,action,sigma_points";
  const std::size_t n = tel.decisions.empty() ? 0 : tel.decisions.front().q_mean.size();
  for (std::size_t a = 0; a < n; ++a) {
    const std::string i = std::to_string(a);
    out += ",q_mean_" + i + ",q_variance_" + i + ",visits_" + i;
  }
  out += '\n';
  for (const auto& d : tel.decisions) {
    put(out, d.time);
    out += ',' + std::to_string(d.action) + ',' + std::to_string(d.sigma_points);
    for (std::size_t a = 0; a < d.q_mean.size(); ++a) {
      out += ',';
      put(out, d.q_mean[a]);
      out += ',';
      put(out, d.q_variance[a]);
      out += ',' + std::to_string(a < d.root_visits.size() ? d.root_visits[a] : 0);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json summary_json(const EpisodeSummary& s) {
  nlohmann::json j;
  j["avg_velocity"] = s.avg_velocity;
  j["avg_velocity_episode"] = s.avg_velocity_episode;
  j["max_abs_jerk"] = s.max_abs_jerk;
  j["crash"] = s.crash;
  j["end"] = to_string(s.end);
  j["detection_time"] = opt(s.detection_time);
  j["detection_distance"] = opt(s.detection_distance);
  j["min_gap"] = opt(s.min_gap);
  if (s.merge) {
    const auto& m = *s.merge;
    j["merge"] = {{"time", m.time},         {"ego_y", m.ego_y},   {"ego_v", m.ego_v},
                  {"mv_y", m.mv_y},         {"mv_v", m.mv_v},     {"mv_ahead", m.mv_ahead},
                  {"distance", m.distance}, {"headway", m.headway}};
  } else {
    j["merge"] = nullptr;
  }
  return j;
}

nlohmann::json episode_json(const ScenarioConfig& scenario, const PlannerConfig& planner,
                            std::uint64_t seed, const EpisodeSummary& s) {
  nlohmann::json j;
  j["scenario"] = to_string(scenario.kind);
  j["planner"] = to_string(planner.kind);
  j["seed"] = seed;
  j["alpha"] = planner.risk.alpha;
  j["epsilon"] = planner.search.epsilon_root;
  j["budget"] = planner.search.budget;
  if (const auto* r = std::get_if<LimitedRangeSensor>(&scenario.sensor)) {
    j["sensor_range"] = r->range;
  }
  j["summary"] = summary_json(s);
  return j;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace raqmdp
