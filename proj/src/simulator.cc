#include "raqmdp/simulator.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace raqmdp {

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::kStationaryObject: return "stationary-object";
    case ScenarioKind::kRampMerge: return "ramp-merge";
  }
  return "unknown";
}

const char* to_string(PlannerKind k) {
  switch (k) {
    case PlannerKind::kRaQmdp: return "ra-qmdp";
    case PlannerKind::kMctsP0: return "mcts-p0";
    case PlannerKind::kMctsP1: return "mcts-p1";
    case PlannerKind::kMctsGenie: return "mcts-genie";
    case PlannerKind::kMctsNoisy: return "mcts-noisy";
  }
  return "unknown";
}

std::optional<ScenarioKind> parse_scenario_kind(const std::string& s) {
  for (auto k : {ScenarioKind::kStationaryObject, ScenarioKind::kRampMerge}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

std::optional<PlannerKind> parse_planner_kind(const std::string& s) {
  for (auto k : {PlannerKind::kRaQmdp, PlannerKind::kMctsP0, PlannerKind::kMctsP1,
                 PlannerKind::kMctsGenie, PlannerKind::kMctsNoisy}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

const char* to_string(EndReason r) {
  switch (r) {
    case EndReason::kDuration: return "duration";
    case EndReason::kCrash: return "crash";
    case EndReason::kStopped: return "stopped";
  }
  return "unknown";
}

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

double LimitedRangeSensor::detection_probability(double distance) const {
  // p(d) = 1 / (1 + exp((d - mid) / scale))
  const double scale = width / (logit(probability_inside) - logit(probability_at_range));
  const double mid = range + scale * logit(probability_at_range);
  return 1.0 / (1.0 + std::exp((distance - mid) / scale));
}

void LimitedRangeSensor::validate() const {
  if (!(range > 0.0)) throw std::invalid_argument("sensor.range must be > 0");
  if (!(width > 0.0)) throw std::invalid_argument("sensor.width must be > 0");
  if (!(probability_at_range > 0.0 && probability_at_range < probability_inside &&
        probability_inside < 1.0)) {
    throw std::invalid_argument(
        "sensor probabilities must satisfy 0 < probability_at_range < probability_inside < 1");
  }
}

double VelocityNoiseSensor::sigma(double tracking_time) const {
  return sigma0 * std::exp(-std::max(tracking_time, 0.0) / tau);
}

void VelocityNoiseSensor::validate() const {
  if (!(sigma0 >= 0.0)) throw std::invalid_argument("sensor.sigma0 must be >= 0");
  if (!(visibility > 0.0)) throw std::invalid_argument("sensor.visibility must be > 0");
  if (!(tau > 0.0)) throw std::invalid_argument("sensor.tau must be > 0");
}

ScenarioConfig ScenarioConfig::defaults(ScenarioKind kind) {
  ScenarioConfig c;
  c.kind = kind;
  if (kind == ScenarioKind::kRampMerge) {
    c.duration = 25.0;
    c.ego_v = 20.0;
    c.sensor = VelocityNoiseSensor{};
  }
  return c;
}

RoadModel ScenarioConfig::road() const {
  RoadModel road;
  road.lanes = {Lane{0, 0.0, lane_width}};
  if (kind == ScenarioKind::kRampMerge) {
    road.lanes.push_back(Lane{1, -lane_width, lane_width});
    road.merge = MergePoint{merge_y, 1, 0, merge_zone};
  }
  return road;
}

WorldState ScenarioConfig::initial_world() const {
  WorldState w;
  w.ego.id = kEgoId;
  w.ego.length = vehicle_length;
  w.ego.state.y = ego_y;
  w.ego.state.vy = ego_v;
  if (kind == ScenarioKind::kStationaryObject) {
    RoadObject obj;
    obj.id = kObjectId;
    obj.kind = ObjectKind::kStationaryObject;
    obj.length = vehicle_length;
    obj.state.y = object_y;
    w.others.push_back(obj);
  } else {
    RoadObject mv;
    mv.id = kMergingId;
    mv.lane = 1;
    mv.length = vehicle_length;
    mv.state.y = mv_y;
    mv.state.vy = mv_v;
    mv.state.x = -lane_width;
    w.others.push_back(mv);
  }
  return w;
}

void ScenarioConfig::validate() const {
  idm.validate();
  cost.validate();
  if (!(duration > 0.0)) throw std::invalid_argument("scenario.duration must be > 0");
  if (!(lane_width > 0.0)) throw std::invalid_argument("road.lane_width must be > 0");
  if (!(vehicle_length > 0.0)) throw std::invalid_argument("road.vehicle_length must be > 0");
  if (!(accel_lag >= 0.0)) throw std::invalid_argument("ego.accel_lag must be >= 0");
  if (!(ego_v >= 0.0 && ego_v <= kMaxSpeed)) throw std::invalid_argument("ego.v out of range");
  if (kind == ScenarioKind::kStationaryObject) {
    if (!std::holds_alternative<LimitedRangeSensor>(sensor)) {
      throw std::invalid_argument("sensor.kind must be limited-range for stationary-object");
    }
    std::get<LimitedRangeSensor>(sensor).validate();
    if (!(object_y - vehicle_length > ego_y)) {
      throw std::invalid_argument("object.y must lie ahead of the ego");
    }
  } else {
    if (!std::holds_alternative<VelocityNoiseSensor>(sensor)) {
      throw std::invalid_argument("sensor.kind must be velocity-noise for ramp-merge");
    }
    std::get<VelocityNoiseSensor>(sensor).validate();
    if (!(mv_v >= 0.0 && mv_v <= kMaxSpeed)) {
      throw std::invalid_argument("merging_vehicle.v out of range");
    }
  }
  road().validate();
}

void PlannerConfig::validate(ScenarioKind scenario) const {
  risk.validate();
  search.validate(default_lane_keep_actions().size());
  if (!(w0 > -1.0 && w0 < 1.0)) throw std::invalid_argument("planner.w0 must lie in (-1, 1)");
  if (!(closeness_epsilon >= 0.0)) {
    throw std::invalid_argument("planner.closeness_epsilon must be >= 0");
  }
  if (substeps < 1) throw std::invalid_argument("planner.substeps must be >= 1");
  const bool s1 = kind == PlannerKind::kMctsP0 || kind == PlannerKind::kMctsP1;
  const bool s2 = kind == PlannerKind::kMctsGenie || kind == PlannerKind::kMctsNoisy;
  if ((s1 && scenario != ScenarioKind::kStationaryObject) ||
      (s2 && scenario != ScenarioKind::kRampMerge)) {
    throw std::invalid_argument(std::string("planner.kind ") + to_string(kind) +
                                " does not apply to scenario " + to_string(scenario));
  }
}

WorldState with_object_at_range(const WorldState& visible, const LimitedRangeSensor& sensor) {
  WorldState w = visible;
  RoadObject obj;
  obj.id = kObjectId;
  obj.kind = ObjectKind::kStationaryObject;
  obj.lane = visible.ego.lane;
  obj.length = visible.ego.length;
  obj.state.y = visible.ego.state.y + sensor.range + obj.length;
  w.others.push_back(obj);
  return w;
}

BeliefState scenario1_belief(const WorldState& visible, const LimitedRangeSensor& sensor) {
  BeliefState b = BeliefState::certain(with_object_at_range(visible, sensor), "object-at-range");
  b.hypotheses.front().probability = sensor.probability_at_range;
  b.hypotheses.push_back(Hypothesis{"clear", visible, 1.0 - sensor.probability_at_range});
  return b;
}

VelocityMeasurement measure_velocity(double true_velocity, double tracking_time,
                                     const VelocityNoiseSensor& sensor, double z) {
  const double sigma = sensor.sigma(tracking_time);
  return VelocityMeasurement{std::clamp(true_velocity + sigma * z, 0.0, kMaxSpeed), sigma};
}

double tracking_error_draw(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 1));
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

BeliefState scenario2_belief(const WorldState& truth, const VelocityMeasurement& m) {
  WorldState w = truth;
  RoadObject* mv = w.find(kMergingId);
  if (mv == nullptr) throw std::invalid_argument("scenario2_belief: no merging vehicle");
  mv->state.vy = m.mean;
  BeliefState b = BeliefState::certain(std::move(w), "measured");
  b.dims = {DimLabel{kMergingId, StateField::kVy}};
  b.mean = Eigen::VectorXd::Constant(1, m.mean);
  b.covariance = Eigen::MatrixXd::Constant(1, 1, m.sigma * m.sigma);
  return b;
}

QmdpDecision<BpAction> plan_decision(const BeliefState& belief, const ScenarioConfig& scenario,
                                     const PlannerConfig& planner, std::uint64_t seed,
                                     std::size_t* sigma_count) {
  const RoadModel road = scenario.road();
  SigmaPointOptions opts;
  opts.w0 = planner.w0;
  opts.closeness_epsilon = {planner.closeness_epsilon};
  opts.feasible = make_default_feasibility(road);
  const SigmaPointSet points = generate_sigma_points(belief, opts);
  if (sigma_count != nullptr) *sigma_count = points.points.size();
  const auto actions = default_lane_keep_actions();
  auto factory = [&](const WorldState& w) {
    return HighwayMdp(w, road, scenario.idm, scenario.cost, actions, planner.search.dt,
                      planner.substeps, scenario.accel_lag);
  };
  return plan_qmdp(points, factory, planner.search, planner.risk, seed, planner.parallel);
}

namespace {

WorldState without(const WorldState& w, int id) {
  WorldState out = w;
  std::erase_if(out.others, [id](const RoadObject& o) { return o.id == id; });
  return out;
}

std::optional<LeadInfo> to_lead(const std::optional<LeadGap>& g) {
  if (!g) return std::nullopt;
  return LeadInfo{g->distance, g->velocity};
}

}  // namespace

Telemetry run_episode(const ScenarioConfig& scenario, const PlannerConfig& planner,
                      std::uint64_t seed) {
  scenario.validate();
  planner.validate(scenario.kind);

  const RoadModel road = scenario.road();
  const auto actions = default_lane_keep_actions();
  const bool stationary = scenario.kind == ScenarioKind::kStationaryObject;
  Rng sensor_rng(derive_seed(seed, 1));
  const std::uint64_t planner_seed = derive_seed(seed, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  WorldState world = scenario.initial_world();
  Telemetry tel;
  auto& summary = tel.summary;
  bool detected = false;
  std::optional<double> tracking_since;
  const double tracking_z = stationary ? 0.0 : tracking_error_draw(seed);
  BpAction current = actions.front();
  // Undetected object hypothesised by the BP; the MP follows it until
  // detection so that intervals execute as the tree evaluated them.
  std::optional<WorldState> hypothesised;
  double prev_ay = world.ego.state.ay;
  double sum_v = 0.0;
  double sum_v_cruise = 0.0;
  long cruise_ticks = 0;

  const long total_ticks = std::lround(scenario.duration / kMpPeriod);
  for (long k = 0; k < total_ticks; ++k) {
    const double t = static_cast<double>(k) * kMpPeriod;

    if (stationary && !detected) {
      const auto& sensor = std::get<LimitedRangeSensor>(scenario.sensor);
      const auto g = gap_to_lead(world, kEgoId, road);
      const double p = g ? sensor.detection_probability(g->distance) : 0.0;
      if (unit(sensor_rng) < p) {
        detected = true;
        summary.detection_time = t;
        summary.detection_distance = g->distance;
      }
    }

    if (k % kMpTicksPerBp == 0) {
      BeliefState belief;
      if (stationary) {
        const auto& sensor = std::get<LimitedRangeSensor>(scenario.sensor);
        const WorldState visible = detected ? world : without(world, kObjectId);
        if (detected) {
          belief = BeliefState::certain(world, "detected");
        } else if (planner.kind == PlannerKind::kMctsP0) {
          belief = BeliefState::certain(visible, "clear");
        } else if (planner.kind == PlannerKind::kMctsP1) {
          belief = BeliefState::certain(with_object_at_range(visible, sensor), "object-at-range");
        } else {
          belief = scenario1_belief(visible, sensor);
        }
        hypothesised.reset();
        if (!detected && planner.kind != PlannerKind::kMctsP0) {
          hypothesised = belief.hypotheses.front().world;
        }
      } else {
        const auto& sensor = std::get<VelocityNoiseSensor>(scenario.sensor);
        if (!tracking_since && scenario.merge_y - world.ego.state.y <= sensor.visibility) {
          tracking_since = t;
        }
        const double v_true = world.find(kMergingId)->state.vy;
        if (!tracking_since) {
          belief = BeliefState::certain(without(world, kMergingId), "untracked");
        } else if (planner.kind == PlannerKind::kMctsGenie) {
          belief = BeliefState::certain(world, "truth");
        } else {
          const auto m = measure_velocity(v_true, t - *tracking_since, sensor, tracking_z);
          belief = planner.kind == PlannerKind::kMctsNoisy
                       ? scenario2_belief(world, VelocityMeasurement{m.mean, 0.0})
                       : scenario2_belief(world, m);
        }
      }
      std::size_t count = 0;
      QmdpDecision<BpAction> decision;
      try {
        decision = plan_decision(belief, scenario, planner,
                                 derive_seed(planner_seed, static_cast<std::uint64_t>(k)),
                                 &count);
      } catch (const std::exception& e) {
        throw EpisodeError("planner failed at t=" + std::to_string(t) + ": " + e.what());
      }
      current = actions[decision.chosen];
      BpRecord rec;
      rec.time = t;
      rec.action = decision.chosen;
      rec.sigma_points = count;
      rec.root_visits.assign(actions.size(), 0);
      for (const auto& r : decision.per_point) {
        for (std::size_t a = 0; a < r.n.size(); ++a) rec.root_visits[a] += r.n[a];
      }
      for (const auto& ae : decision.estimate.actions) {
        rec.q_mean.push_back(ae.mean);
        rec.q_variance.push_back(ae.variance);
      }
      tel.decisions.push_back(std::move(rec));
    }

    // Motion planner for the ego; it only sees detected objects.
    const WorldState perceived = (stationary && !detected) ? without(world, kObjectId) : world;
    WorldState planning = perceived;
    if (hypothesised && !detected) {
      planning.others.push_back(*hypothesised->find(kObjectId));
    }
    const double a_ego = mp_tick_accel(
        world.ego.state.vy, world.ego.state.ay, to_lead(gap_to_lead(planning, kEgoId, road, true)),
        to_lead(gap_to_lead(perceived, kEgoId, road)), current.accel, scenario.idm, kMpPeriod,
        scenario.accel_lag);

    WorldState next = world;
    for (auto& o : next.others) {
      if (o.kind == ObjectKind::kStationaryObject) continue;
      const double a = idm_accel(o.state.vy, to_lead(gap_to_lead(world, o.id, road)),
                                 scenario.idm);
      o.state = step_kinematics(o.state, a, kMpPeriod);
    }
    next.ego.state = step_kinematics(world.ego.state, a_ego, kMpPeriod);
    next.time = static_cast<double>(k + 1) * kMpPeriod;
    world = std::move(next);

    TickRecord row;
    row.time = world.time;
    row.ego_y = world.ego.state.y;
    row.ego_vy = world.ego.state.vy;
    row.ego_ay = world.ego.state.ay;
    row.jerk = (row.ego_ay - prev_ay) / kMpPeriod;
    prev_ay = row.ego_ay;
    const auto lead = gap_to_lead(world, kEgoId, road);
    if (lead) {
      row.gap = lead->distance;
      if (row.ego_vy > 0.0) row.headway = lead->distance / row.ego_vy;
      summary.min_gap = std::min(summary.min_gap.value_or(lead->distance), lead->distance);
    }
    tel.ticks.push_back(row);

    sum_v += row.ego_vy;
    if (!detected) {
      sum_v_cruise += row.ego_vy;
      ++cruise_ticks;
    }
    summary.max_abs_jerk = std::max(summary.max_abs_jerk, std::abs(row.jerk));

    if (!stationary && !summary.merge && world.ego.state.y >= scenario.merge_y) {
      const auto& mv = *world.find(kMergingId);
      MergeSnapshot snap;
      snap.time = world.time;
      snap.ego_y = world.ego.state.y;
      snap.ego_v = world.ego.state.vy;
      snap.mv_y = mv.state.y;
      snap.mv_v = mv.state.vy;
      snap.mv_ahead = mv.state.y > world.ego.state.y;
      if (snap.mv_ahead) {
        snap.distance = mv.state.y - mv.length - world.ego.state.y;
        snap.headway = snap.ego_v > 0.0 ? snap.distance / snap.ego_v
                                        : std::numeric_limits<double>::infinity();
      } else {
        snap.distance = world.ego.state.y - world.ego.length - mv.state.y;
        snap.headway = snap.mv_v > 0.0 ? snap.distance / snap.mv_v
                                       : std::numeric_limits<double>::infinity();
      }
      summary.merge = snap;
    }

    bool crash = lead && is_crash(lead->distance, world.ego.state.vy, lead->velocity);
    for (const auto& o : world.others) {
      if (o.kind == ObjectKind::kStationaryObject) continue;
      const auto g = gap_to_lead(world, o.id, road);
      if (g && is_crash(g->distance, o.state.vy, g->velocity)) crash = true;
    }
    if (crash) {
      summary.crash = true;
      summary.end = EndReason::kCrash;
      break;
    }
    if (stationary && detected && world.ego.state.vy <= 0.0) {
      summary.end = EndReason::kStopped;
      break;
    }
  }

  const auto n = static_cast<double>(tel.ticks.size());
  summary.avg_velocity_episode = n > 0 ? sum_v / n : 0.0;
  if (stationary && cruise_ticks > 0) {
    summary.avg_velocity = sum_v_cruise / static_cast<double>(cruise_ticks);
  } else {
    summary.avg_velocity = summary.avg_velocity_episode;
  }
  return tel;
}

}  // namespace raqmdp
