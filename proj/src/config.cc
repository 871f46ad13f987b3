#include "raqmdp/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace raqmdp {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Entries = std::map<std::string, Entry>;  // "section.key" -> entry

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
  const auto pos = s.find_first_of("#;");
  return pos == std::string::npos ? s : s.substr(0, pos);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(out)) {
    throw std::invalid_argument("expected a finite number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) {
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + v + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

Setter number(double ScenarioConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& v) { c.scenario.*field = to_double(v); };
}

Setter positive(std::function<double&(ExperimentConfig&)> ref) {
  return [ref](ExperimentConfig& c, const std::string& v) {
    const double x = to_double(v);
    if (!(x > 0.0)) throw std::invalid_argument("must be > 0");
    ref(c) = x;
  };
}

Setter non_negative(std::function<double&(ExperimentConfig&)> ref) {
  return [ref](ExperimentConfig& c, const std::string& v) {
    const double x = to_double(v);
    if (!(x >= 0.0)) throw std::invalid_argument("must be >= 0");
    ref(c) = x;
  };
}

template <class Sensor>
Sensor& sensor_as(ExperimentConfig& c, const char* key) {
  auto* s = std::get_if<Sensor>(&c.scenario.sensor);
  if (s == nullptr) {
    throw std::invalid_argument(std::string("does not apply to sensor kind ") +
                                (std::holds_alternative<LimitedRangeSensor>(c.scenario.sensor)
                                     ? "limited-range"
                                     : "velocity-noise") +
                                " (" + key + ")");
  }
  return *s;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"scenario.duration", positive([](auto& c) -> double& { return c.scenario.duration; })},
      {"scenario.seed",
       [](ExperimentConfig& c, const std::string& v) {
         const long long s = to_int(v);
         if (s < 0) throw std::invalid_argument("must be >= 0");
         c.scenario.seed = static_cast<std::uint64_t>(s);
       }},
      {"planner.kind",
       [](ExperimentConfig& c, const std::string& v) {
         const auto k = parse_planner_kind(v);
         if (!k) throw std::invalid_argument("unknown planner '" + v + "'");
         c.planner.kind = *k;
       }},
      {"planner.alpha", non_negative([](auto& c) -> double& { return c.planner.risk.alpha; })},
      {"planner.w0",
       [](ExperimentConfig& c, const std::string& v) {
         const double x = to_double(v);
         if (!(x > -1.0 && x < 1.0)) throw std::invalid_argument("must lie in (-1, 1)");
         c.planner.w0 = x;
       }},
      {"planner.closeness_epsilon",
       non_negative([](auto& c) -> double& { return c.planner.closeness_epsilon; })},
      {"planner.substeps",
       [](ExperimentConfig& c, const std::string& v) {
         const long long n = to_int(v);
         if (n < 1 || n > 1000) throw std::invalid_argument("must lie in [1, 1000]");
         c.planner.substeps = static_cast<int>(n);
       }},
      {"planner.parallel",
       [](ExperimentConfig& c, const std::string& v) { c.planner.parallel = to_bool(v); }},
      {"search.depth",
       [](ExperimentConfig& c, const std::string& v) {
         const long long n = to_int(v);
         if (n < 1 || n > 1000) throw std::invalid_argument("must lie in [1, 1000]");
         c.planner.search.depth = static_cast<int>(n);
       }},
      {"search.budget",
       [](ExperimentConfig& c, const std::string& v) {
         const long long n = to_int(v);
         if (n < 1) throw std::invalid_argument("must be >= 1");
         c.planner.search.budget = static_cast<long>(n);
       }},
      {"search.c_uct", non_negative([](auto& c) -> double& { return c.planner.search.c_uct; })},
      {"search.epsilon",
       [](ExperimentConfig& c, const std::string& v) {
         const double x = to_double(v);
         if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("must lie in [0, 1]");
         c.planner.search.epsilon_root = x;
       }},
      {"search.discount",
       [](ExperimentConfig& c, const std::string& v) {
         const double x = to_double(v);
         if (!(x > 0.0 && x <= 1.0)) throw std::invalid_argument("must lie in (0, 1]");
         c.planner.search.discount = x;
       }},
      {"search.dt", positive([](auto& c) -> double& { return c.planner.search.dt; })},
      {"search.randomize_untried",
       [](ExperimentConfig& c, const std::string& v) {
         c.planner.search.randomize_untried = to_bool(v);
       }},
      {"idm.s0", positive([](auto& c) -> double& { return c.scenario.idm.s0; })},
      {"idm.rho", positive([](auto& c) -> double& { return c.scenario.idm.rho; })},
      {"idm.v_desired", positive([](auto& c) -> double& { return c.scenario.idm.v_desired; })},
      {"idm.a_max", positive([](auto& c) -> double& { return c.scenario.idm.a_max; })},
      {"idm.b_safe", positive([](auto& c) -> double& { return c.scenario.idm.b_safe; })},
      {"idm.b_max", positive([](auto& c) -> double& { return c.scenario.idm.b_max; })},
      {"cost.closeness", non_negative([](auto& c) -> double& { return c.scenario.cost.closeness; })},
      {"cost.crash", non_negative([](auto& c) -> double& { return c.scenario.cost.crash; })},
      {"cost.hard_brake",
       non_negative([](auto& c) -> double& { return c.scenario.cost.hard_brake; })},
      {"cost.jerk", non_negative([](auto& c) -> double& { return c.scenario.cost.jerk; })},
      {"cost.velocity", non_negative([](auto& c) -> double& { return c.scenario.cost.velocity; })},
      {"road.lane_width", positive([](auto& c) -> double& { return c.scenario.lane_width; })},
      {"road.merge_y", number(&ScenarioConfig::merge_y)},
      {"road.merge_zone", non_negative([](auto& c) -> double& { return c.scenario.merge_zone; })},
      {"road.vehicle_length",
       positive([](auto& c) -> double& { return c.scenario.vehicle_length; })},
      {"ego.y", number(&ScenarioConfig::ego_y)},
      {"ego.v",
       [](ExperimentConfig& c, const std::string& v) {
         const double x = to_double(v);
         if (!(x >= 0.0 && x <= kMaxSpeed)) throw std::invalid_argument("must lie in [0, 70]");
         c.scenario.ego_v = x;
       }},
      {"ego.accel_lag", non_negative([](auto& c) -> double& { return c.scenario.accel_lag; })},
      {"object.y", number(&ScenarioConfig::object_y)},
      {"merging_vehicle.y", number(&ScenarioConfig::mv_y)},
      {"merging_vehicle.v",
       [](ExperimentConfig& c, const std::string& v) {
         const double x = to_double(v);
         if (!(x >= 0.0 && x <= kMaxSpeed)) throw std::invalid_argument("must lie in [0, 70]");
         c.scenario.mv_v = x;
       }},
      {"sensor.range",
       positive([](auto& c) -> double& { return sensor_as<LimitedRangeSensor>(c, "range").range; })},
      {"sensor.width",
       positive([](auto& c) -> double& { return sensor_as<LimitedRangeSensor>(c, "width").width; })},
      {"sensor.probability_at_range",
       [](ExperimentConfig& c, const std::string& v) {
         const double x = to_double(v);
         if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("must lie in (0, 1)");
         sensor_as<LimitedRangeSensor>(c, "probability_at_range").probability_at_range = x;
       }},
      {"sensor.probability_inside",
       [](ExperimentConfig& c, const std::string& v) {
         const double x = to_double(v);
         if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("must lie in (0, 1)");
         sensor_as<LimitedRangeSensor>(c, "probability_inside").probability_inside = x;
       }},
      {"sensor.sigma0", non_negative([](auto& c) -> double& {
         return sensor_as<VelocityNoiseSensor>(c, "sigma0").sigma0;
       })},
      {"sensor.tau",
       positive([](auto& c) -> double& { return sensor_as<VelocityNoiseSensor>(c, "tau").tau; })},
      {"sensor.visibility", positive([](auto& c) -> double& {
         return sensor_as<VelocityNoiseSensor>(c, "visibility").visibility;
       })},
  };
  return table;
}

}  // namespace

std::string located(const std::string& source, int line, const std::string& msg) {
  if (line <= 0) return source + ": " + msg;
  return source + ":" + std::to_string(line) + ": " + msg;
}

std::vector<IniEntry> read_ini(std::istream& in, const std::string& source) {
  std::vector<IniEntry> out;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(located(source, line_no, "unterminated section"));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(located(source, line_no, "empty section name"));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(located(source, line_no, "expected 'key = value'"));
    }
    if (section.empty()) throw ConfigError(located(source, line_no, "key outside a section"));
    IniEntry e{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
    if (e.key.empty()) throw ConfigError(located(source, line_no, "missing key"));
    if (e.value.empty()) {
      throw ConfigError(located(source, line_no, section + "." + e.key + ": missing value"));
    }
    out.push_back(std::move(e));
  }
  return out;
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  Entries entries;
  for (const auto& e : read_ini(in, source)) {
    const int line_no = e.line;
    const std::string key = e.section + "." + e.key;
    const std::string& value = e.value;
    const bool known = setters().count(key) != 0 || key == "scenario.kind" || key == "sensor.kind";
    if (!known) throw ConfigError(located(source, line_no, "unknown field " + key));
    const auto [it, inserted] = entries.emplace(key, Entry{value, line_no});
    if (!inserted) {
      throw ConfigError(located(source, line_no,
                                key + ": duplicate (first set on line " +
                                    std::to_string(it->second.line) + ")"));
    }
  }

  // Kinds first: they choose the defaults and the sensor variant.
  ScenarioKind kind = ScenarioKind::kStationaryObject;
  if (auto it = entries.find("scenario.kind"); it != entries.end()) {
    const auto k = parse_scenario_kind(it->second.value);
    if (!k) {
      throw ConfigError(located(source, it->second.line,
                                "scenario.kind: unknown scenario '" + it->second.value + "'"));
    }
    kind = *k;
  }
  ExperimentConfig cfg;
  cfg.scenario = ScenarioConfig::defaults(kind);
  if (auto it = entries.find("sensor.kind"); it != entries.end()) {
    const std::string& v = it->second.value;
    if (v == "limited-range") {
      if (!std::holds_alternative<LimitedRangeSensor>(cfg.scenario.sensor)) {
        cfg.scenario.sensor = LimitedRangeSensor{};
      }
    } else if (v == "velocity-noise") {
      if (!std::holds_alternative<VelocityNoiseSensor>(cfg.scenario.sensor)) {
        cfg.scenario.sensor = VelocityNoiseSensor{};
      }
    } else {
      throw ConfigError(located(source, it->second.line, "sensor.kind: unknown sensor '" + v + "'"));
    }
  }

  for (const auto& [key, entry] : entries) {
    if (key == "scenario.kind" || key == "sensor.kind") continue;
    try {
      setters().at(key)(cfg, entry.value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(located(source, entry.line, key + ": " + e.what()));
    }
  }

  try {
    cfg.scenario.validate();
    cfg.planner.validate(cfg.scenario.kind);
  } catch (const std::invalid_argument& e) {
    // Anchor to the line of the field named at the start of the message.
    const std::string msg = e.what();
    int line = 0;
    for (const auto& [key, entry] : entries) {
      if (msg.rfind(key, 0) == 0) line = entry.line;
    }
    throw ConfigError(located(source, line, msg));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  return parse_config(in, path.string());
}

}  // namespace raqmdp
