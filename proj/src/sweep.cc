#include "raqmdp/sweep.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "raqmdp/telemetry_io.h"

namespace raqmdp {

const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::kAlpha: return "alpha";
    case SweepParameter::kEpsilon: return "epsilon";
    case SweepParameter::kSensorRange: return "sensor-range";
    case SweepParameter::kPlanner: return "planner";
  }
  return "unknown";
}

std::optional<SweepParameter> parse_sweep_parameter(const std::string& s) {
  for (auto p : {SweepParameter::kAlpha, SweepParameter::kEpsilon, SweepParameter::kSensorRange,
                 SweepParameter::kPlanner}) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep.values must not be empty");
  if (seeds.empty()) throw std::invalid_argument("sweep.seeds must not be empty");
  if (scenario.empty()) throw std::invalid_argument("sweep.scenario is required");
  if (parameter == SweepParameter::kSensorRange && !sensor_ranges.empty()) {
    throw std::invalid_argument("sweep.sensor_ranges cannot be combined with parameter sensor-range");
  }
  for (double r : sensor_ranges) {
    if (!(r > 0.0)) throw std::invalid_argument("sweep.sensor_ranges must be > 0");
  }
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string::npos ? s.size() : comma;
    std::string item = s.substr(start, end - start);
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    item = b == std::string::npos ? "" : item.substr(b, e - b + 1);
    if (item.empty()) throw std::invalid_argument("empty list item");
    out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t parse_seed(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("expected a non-negative integer, got '" + s + "'");
  }
  return std::stoull(s);
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(s)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(parse_seed(item));
      continue;
    }
    const auto lo = parse_seed(item.substr(0, dash));
    const auto hi = parse_seed(item.substr(dash + 1));
    if (hi < lo) throw std::invalid_argument("descending seed range '" + item + "'");
    if (hi - lo > 100000) throw std::invalid_argument("seed range too large '" + item + "'");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

SweepSpec parse_sweep_spec(std::istream& in, const std::string& source,
                           const std::filesystem::path& base_dir) {
  SweepSpec spec;
  std::map<std::string, int> seen;
  int first_line = 0;
  for (const auto& e : read_ini(in, source)) {
    if (first_line == 0) first_line = e.line;
    const std::string key = e.section + "." + e.key;
    if (e.section != "sweep") {
      throw ConfigError(located(source, e.line, "unknown field " + key));
    }
    if (!seen.emplace(e.key, e.line).second) {
      throw ConfigError(located(source, e.line, key + ": duplicate"));
    }
    try {
      if (e.key == "parameter") {
        const auto p = parse_sweep_parameter(e.value);
        if (!p) throw std::invalid_argument("unknown parameter '" + e.value + "'");
        spec.parameter = *p;
      } else if (e.key == "values") {
        spec.values = split_list(e.value);
      } else if (e.key == "seeds") {
        spec.seeds = parse_seeds(e.value);
      } else if (e.key == "scenario") {
        const std::filesystem::path p(e.value);
        spec.scenario = p.is_absolute() ? p : base_dir / p;
      } else if (e.key == "sensor_ranges") {
        for (const auto& item : split_list(e.value)) spec.sensor_ranges.push_back(parse_double(item));
      } else {
        throw ConfigError(located(source, e.line, "unknown field " + key));
      }
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(located(source, e.line, key + ": " + ex.what()));
    }
  }
  for (const char* required : {"parameter", "values", "seeds", "scenario"}) {
    if (!seen.count(required)) {
      throw ConfigError(located(source, 0, std::string("sweep.") + required + " is required"));
    }
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& ex) {
    const std::string msg = ex.what();
    int line = 0;
    for (const auto& [key, l] : seen) {
      if (msg.rfind("sweep." + key, 0) == 0) line = l;
    }
    throw ConfigError(located(source, line, msg));
  }
  return spec;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  return parse_sweep_spec(in, path.string(), path.parent_path());
}

std::size_t CellResult::completed() const {
  return static_cast<std::size_t>(
      std::count_if(episodes.begin(), episodes.end(), [](const auto& e) { return e.ok; }));
}

std::size_t CellResult::crashes() const {
  return static_cast<std::size_t>(std::count_if(
      episodes.begin(), episodes.end(), [](const auto& e) { return e.ok && e.summary.crash; }));
}

namespace {

template <class F>
double mean_over(const std::vector<EpisodeOutcome>& eps, F f) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& e : eps) {
    if (!e.ok) continue;
    sum += f(e.summary);
    ++n;
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

}  // namespace

double CellResult::avg_velocity() const {
  return mean_over(episodes, [](const EpisodeSummary& s) { return s.avg_velocity; });
}

double CellResult::max_abs_jerk() const {
  return mean_over(episodes, [](const EpisodeSummary& s) { return s.max_abs_jerk; });
}

double CellResult::worst_abs_jerk() const {
  double w = std::numeric_limits<double>::quiet_NaN();
  for (const auto& e : episodes) {
    if (e.ok && !(e.summary.max_abs_jerk <= w)) w = e.summary.max_abs_jerk;
  }
  return w;
}

ExperimentConfig cell_config(const ExperimentConfig& base, const SweepSpec& spec,
                             std::size_t value_index, std::optional<double> sensor_range) {
  ExperimentConfig cfg = base;
  const std::string& value = spec.values.at(value_index);
  auto set_range = [&](double r) {
    auto* s = std::get_if<LimitedRangeSensor>(&cfg.scenario.sensor);
    if (s == nullptr) throw ConfigError("sensor range applies only to the stationary-object scenario");
    s->range = r;
  };
  try {
    switch (spec.parameter) {
      case SweepParameter::kAlpha: cfg.planner.risk.alpha = parse_double(value); break;
      case SweepParameter::kEpsilon: cfg.planner.search.epsilon_root = parse_double(value); break;
      case SweepParameter::kSensorRange: set_range(parse_double(value)); break;
      case SweepParameter::kPlanner: {
        const auto k = parse_planner_kind(value);
        if (!k) throw std::invalid_argument("unknown planner '" + value + "'");
        cfg.planner.kind = *k;
        break;
      }
    }
    if (sensor_range) set_range(*sensor_range);
    cfg.scenario.validate();
    cfg.planner.validate(cfg.scenario.kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("sweep value '") + value + "': " + e.what());
  }
  return cfg;
}

SweepResult run_sweep(const SweepSpec& spec, const ExperimentConfig& base, int parallel,
                      const std::filesystem::path& out_dir) {
  spec.validate();
  SweepResult result;
  result.parameter = spec.parameter;
  std::vector<std::optional<double>> ranges;
  if (spec.sensor_ranges.empty()) {
    ranges.push_back(std::nullopt);
  } else {
    ranges.assign(spec.sensor_ranges.begin(), spec.sensor_ranges.end());
  }
  for (std::size_t v = 0; v < spec.values.size(); ++v) {
    for (const auto& r : ranges) {
      CellResult cell;
      cell.value = spec.values[v];
      cell.config = cell_config(base, spec, v, r);
      if (const auto* s = std::get_if<LimitedRangeSensor>(&cell.config.scenario.sensor)) {
        cell.sensor_range = s->range;
      }
      cell.episodes.resize(spec.seeds.size());
      result.cells.push_back(std::move(cell));
    }
  }

  const std::size_t per_cell = spec.seeds.size();
  const std::size_t jobs = result.cells.size() * per_cell;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const std::size_t c = j / per_cell;
      const std::size_t k = j % per_cell;
      CellResult& cell = result.cells[c];
      EpisodeOutcome& out = cell.episodes[k];
      out.seed = spec.seeds[k];
      try {
        out.summary = run_episode(cell.config.scenario, cell.config.planner, out.seed).summary;
        out.ok = true;
      } catch (const std::exception& e) {
        out.error = e.what();
      }
      if (!out_dir.empty()) {
        nlohmann::json rec = episode_json(cell.config.scenario, cell.config.planner, out.seed,
                                          out.summary);
        rec["value"] = cell.value;
        rec["ok"] = out.ok;
        if (!out.ok) rec["error"] = out.error;
        char name[96];
        std::snprintf(name, sizeof(name), "cell-%03zu/seed-%llu.json", c,
                      static_cast<unsigned long long>(out.seed));
        write_file_atomic(out_dir / "cells" / name, rec.dump(2) + "\n");
      }
    }
  };
  const int n = std::max(1, std::min<int>(parallel, static_cast<int>(jobs)));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return result;
}

nlohmann::json sweep_json(const SweepResult& r) {
  nlohmann::json j;
  j["parameter"] = to_string(r.parameter);
  j["cells"] = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json cell;
    cell["value"] = c.value;
    cell["planner"] = to_string(c.config.planner.kind);
    cell["alpha"] = c.config.planner.risk.alpha;
    cell["epsilon"] = c.config.planner.search.epsilon_root;
    cell["sensor_range"] = c.sensor_range ? nlohmann::json(*c.sensor_range) : nlohmann::json(nullptr);
    cell["episodes"] = c.episodes.size();
    cell["completed"] = c.completed();
    cell["crashes"] = c.crashes();
    const double v = c.avg_velocity();
    cell["avg_velocity"] = std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
    cell["safe_distance"] = std::isnan(v) ? nlohmann::json(nullptr)
                                          : nlohmann::json(safe_distance(v, 0.0, c.config.scenario.idm));
    const double jk = c.max_abs_jerk();
    cell["max_abs_jerk"] = std::isnan(jk) ? nlohmann::json(nullptr) : nlohmann::json(jk);
    const double w = c.worst_abs_jerk();
    cell["worst_abs_jerk"] = std::isnan(w) ? nlohmann::json(nullptr) : nlohmann::json(w);
    nlohmann::json eps = nlohmann::json::array();
    for (const auto& e : c.episodes) {
      nlohmann::json ej;
      ej["seed"] = e.seed;
      ej["ok"] = e.ok;
      if (e.ok) {
        ej["summary"] = summary_json(e.summary);
      } else {
        ej["error"] = e.error;
      }
      eps.push_back(std::move(ej));
    }
    cell["runs"] = std::move(eps);
    j["cells"].push_back(std::move(cell));
  }
  return j;
}

std::string sweep_table_csv(const SweepResult& r) {
  std::string out =
      "alpha,epsilon,planner,sensor_range,episodes,failures,crashes,avg_velocity,safe_distance,"
      "max_abs_jerk\n";
  char buf[512];
  for (const auto& c : r.cells) {
    const double v = c.avg_velocity();
    const std::string range = c.sensor_range ? format_number(*c.sensor_range) : "";
    std::string v_s, s_s, j_s;
    if (!std::isnan(v)) {
      std::snprintf(buf, sizeof(buf), "%.6f", v);
      v_s = buf;
      std::snprintf(buf, sizeof(buf), "%.6f", safe_distance(v, 0.0, c.config.scenario.idm));
      s_s = buf;
      std::snprintf(buf, sizeof(buf), "%.6f", c.max_abs_jerk());
      j_s = buf;
    }
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%s,%zu,%zu,%zu,%s,%s,%s\n",
                  format_number(c.config.planner.risk.alpha).c_str(),
                  format_number(c.config.planner.search.epsilon_root).c_str(),
                  to_string(c.config.planner.kind), range.c_str(), c.episodes.size(),
                  c.episodes.size() - c.completed(), c.crashes(), v_s.c_str(), s_s.c_str(),
                  j_s.c_str());
    out += buf;
  }
  return out;
}

std::string scatter_svg(const SweepResult& r, std::optional<double> sensor_range) {
  struct Point {
    double v, j;
    std::string label;
  };
  std::vector<Point> pts;
  for (const auto& c : r.cells) {
    if (sensor_range && c.sensor_range != sensor_range) continue;
    const double v = c.avg_velocity();
    if (std::isnan(v)) continue;
    pts.push_back({v, c.max_abs_jerk(), c.value});
  }
  const double w = 640, h = 480, left = 70, right = 20, top = 40, bottom = 60;
  double vmin = 0, vmax = 1, jmin = 0, jmax = 1;
  if (!pts.empty()) {
    vmin = vmax = pts.front().v;
    jmax = pts.front().j;
    for (const auto& p : pts) {
      vmin = std::min(vmin, p.v);
      vmax = std::max(vmax, p.v);
      jmax = std::max(jmax, p.j);
    }
    const double pad = std::max(0.5, 0.1 * (vmax - vmin));
    vmin = std::max(0.0, vmin - pad);
    vmax += pad;
    jmax = jmax > 0.0 ? jmax * 1.1 : 1.0;
  }
  auto sx = [&](double v) { return left + (v - vmin) / (vmax - vmin) * (w - left - right); };
  auto sy = [&](double j) { return h - bottom - (j - jmin) / (jmax - jmin) * (h - top - bottom); };

  std::string s;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\" font-size=\"12\">\n",
                w, h, w, h);
  s += buf;
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::string title =
      sensor_range ? "sensor range " + format_number(*sensor_range) + " m" : std::string("all cells");
  std::snprintf(buf, sizeof(buf), "<text x=\"%g\" y=\"24\" text-anchor=\"middle\">%s</text>\n",
                w / 2, title.c_str());
  s += buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n"
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
                left, h - bottom, w - right, h - bottom, left, top, left, h - bottom);
  s += buf;
  for (int i = 0; i <= 5; ++i) {
    const double v = vmin + (vmax - vmin) * i / 5.0;
    const double j = jmin + (jmax - jmin) * i / 5.0;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%g\" text-anchor=\"middle\">%.1f</text>\n"
                  "<text x=\"%g\" y=\"%.2f\" text-anchor=\"end\">%.1f</text>\n",
                  sx(v), h - bottom + 18, v, left - 6, sy(j) + 4, j);
    s += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">average velocity (m/s)</text>\n"
                "<text x=\"18\" y=\"%g\" text-anchor=\"middle\" transform=\"rotate(-90 18 %g)\">"
                "max |jerk| (m/s^3)</text>\n",
                (left + w - right) / 2, h - 16, (top + h - bottom) / 2, (top + h - bottom) / 2);
  s += buf;
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof(buf),
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"steelblue\"/>\n"
                  "<text x=\"%.2f\" y=\"%.2f\">%s</text>\n",
                  sx(p.v), sy(p.j), sx(p.v) + 6, sy(p.j) - 6, p.label.c_str());
    s += buf;
  }
  s += "</svg>\n";
  return s;
}

void write_sweep_outputs(const SweepResult& r, const std::filesystem::path& out_dir) {
  write_file_atomic(out_dir / "summary.json", sweep_json(r).dump(2) + "\n");
  write_file_atomic(out_dir / "table.csv", sweep_table_csv(r));
  std::vector<double> ranges;
  for (const auto& c : r.cells) {
    if (c.sensor_range &&
        std::find(ranges.begin(), ranges.end(), *c.sensor_range) == ranges.end()) {
      ranges.push_back(*c.sensor_range);
    }
  }
  if (ranges.empty()) {
    write_file_atomic(out_dir / "scatter.svg", scatter_svg(r, std::nullopt));
  }
  for (double range : ranges) {
    write_file_atomic(out_dir / ("scatter_range_" + format_number(range) + ".svg"),
                      scatter_svg(r, range));
  }
}

}  // namespace raqmdp
