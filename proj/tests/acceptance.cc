// Acceptance checks, one PASS/FAIL line per criterion.
//
//   acceptance [N ...]    run the listed criteria (default: all)
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles/grid_mdp.h"
#include "raqmdp/belief.h"
#include "raqmdp/config.h"
#include "raqmdp/idm.h"
#include "raqmdp/mcts.h"
#include "raqmdp/qmdp.h"
#include "raqmdp/simulator.h"
#include "raqmdp/telemetry_io.h"

using namespace raqmdp;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

ExperimentConfig config(const char* name) {
  return load_config(std::string(RAQMDP_CONFIG_DIR) + "/" + name);
}

ExperimentConfig scenario1(PlannerKind kind, double range) {
  auto c = config("scenario1.ini");
  c.planner.kind = kind;
  std::get<LimitedRangeSensor>(c.scenario.sensor).range = range;
  return c;
}

double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double stddev(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

// 1. Published safe distances, +-0.01 m.
Verdict safe_distance_table() {
  const IdmParams p;
  const double a = safe_distance(19.17, 0.0, p);
  const double b = safe_distance(18.93, 0.0, p);
  const bool ok_a = std::abs(a - 53.19) <= 0.01;
  const bool ok_b = std::abs(b - 51.99) <= 0.01;
  return {ok_a && ok_b, fmt("s*(19.17,0)=%.4f (want 53.19, %s) s*(18.93,0)=%.4f (want 51.99, %s)",
                            a, ok_a ? "ok" : "off", b, ok_b ? "ok" : "off")};
}

// 2. Blind planner crash boundary near v_d^2 / (2 b_max).
Verdict crash_threshold() {
  const double analytic = 29.17 * 29.17 / (2.0 * 8.0);
  auto crashed = [](double range, std::uint64_t seed) {
    const auto c = scenario1(PlannerKind::kMctsP0, range);
    return run_episode(c.scenario, c.planner, seed).summary.crash;
  };
  bool ok = true;
  std::vector<double> bounds;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const bool at45 = crashed(45.0, seed);
    const bool at60 = crashed(60.0, seed);
    if (!at45 || at60) {
      ok = false;
      bounds.push_back(std::nan(""));
      continue;
    }
    double lo = 45.0, hi = 60.0;
    while (hi - lo > 0.25) {
      const double mid = 0.5 * (lo + hi);
      (crashed(mid, seed) ? lo : hi) = mid;
    }
    const double b = 0.5 * (lo + hi);
    bounds.push_back(b);
    ok = ok && std::abs(b - analytic) <= 2.0;
  }
  const auto [mn, mx] = std::minmax_element(bounds.begin(), bounds.end());
  return {ok, fmt("crash at 45 / none at 60 on every seed; boundary in [%.2f, %.2f] m, "
                  "analytic %.2f +- 2",
                  *mn, *mx, analytic)};
}

// 3. Velocity ordering at 60/80/100 m and jerk ordering at 60 m.
Verdict tradeoff_ordering() {
  bool ok = true;
  std::string detail;
  for (double range : {60.0, 80.0, 100.0}) {
    double v[3], j[3];
    int crashes = 0;
    const PlannerKind kinds[] = {PlannerKind::kMctsP1, PlannerKind::kRaQmdp, PlannerKind::kMctsP0};
    for (int k = 0; k < 3; ++k) {
      std::vector<double> vs, js;
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto c = scenario1(kinds[k], range);
        const auto s = run_episode(c.scenario, c.planner, seed).summary;
        vs.push_back(s.avg_velocity);
        js.push_back(s.max_abs_jerk);
        crashes += s.crash ? 1 : 0;
      }
      v[k] = mean(vs);
      j[k] = mean(js);
    }
    const bool vel = v[0] < v[1] && v[1] < v[2] && std::abs(v[2] - 29.17) <= 0.1;
    const bool jerk = range != 60.0 || (j[0] <= j[1] && j[1] <= j[2]);
    ok = ok && vel && jerk && crashes == 0;
    detail += fmt("%s%.0fm v(P1,RA,P0)=%.2f,%.2f,%.2f jerk=%.1f,%.1f,%.1f crashes=%d",
                  detail.empty() ? "" : "; ", range, v[0], v[1], v[2], j[0], j[1], j[2], crashes);
  }
  return {ok, detail};
}

// 4. Root exploration: spread of the lowest-value action's estimate, and
// round-robin visit counts.
Verdict epsilon_ablation() {
  const auto base = scenario1(PlannerKind::kRaQmdp, 60.0);
  WorldState visible = base.scenario.initial_world();
  std::erase_if(visible.others, [](const RoadObject& o) { return o.id == kObjectId; });
  const auto belief =
      scenario1_belief(visible, std::get<LimitedRangeSensor>(base.scenario.sensor));
  std::vector<std::vector<double>> q[2];
  std::vector<std::vector<long>> visits[2];
  bool visits_ok = true;
  long worst = 0;
  for (int e = 0; e < 2; ++e) {
    auto planner = base.planner;
    planner.search.epsilon_root = e == 0 ? 0.0 : 1.0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const auto d = plan_decision(belief, base.scenario, planner, seed);
      std::vector<double> means;
      for (const auto& a : d.estimate.actions) means.push_back(a.mean);
      q[e].push_back(means);
      std::vector<long> n(5, 0);
      for (const auto& r : d.per_point) {
        for (std::size_t a = 0; a < 5; ++a) n[a] += r.n[a];
      }
      visits[e].push_back(n);
      if (e == 1) {
        const long share = planner.search.budget / 5;
        std::vector<long> total(5, 0);
        for (const auto& r : d.per_point) {
          for (std::size_t a = 0; a < 5; ++a) total[a] += r.n[a];
        }
        for (long n : total) {
          worst = std::max(worst, std::abs(n - share));
          visits_ok = visits_ok && std::abs(n - share) <= 1;
        }
      }
    }
  }
  // Lowest-value action: lowest mean estimate over all runs.
  std::size_t low = 0;
  double low_value = 1e300;
  for (std::size_t a = 0; a < 5; ++a) {
    std::vector<double> all;
    for (int e = 0; e < 2; ++e) {
      for (const auto& m : q[e]) all.push_back(m[a]);
    }
    if (mean(all) < low_value) {
      low_value = mean(all);
      low = a;
    }
  }
  std::vector<double> s0, s1, n0;
  for (const auto& m : q[0]) s0.push_back(m[low]);
  for (const auto& m : q[1]) s1.push_back(m[low]);
  for (const auto& n : visits[0]) n0.push_back(static_cast<double>(n[low]));
  const double sd0 = stddev(s0), sd1 = stddev(s1);
  return {sd1 < sd0 && visits_ok,
          fmt("action %zu: sd(eps=1)=%.3f sd(eps=0)=%.3f (mean visits at eps=0: %.1f); "
              "max |N - budget/5| = %ld",
              low, sd1, sd0, mean(n0), worst)};
}

// 5. Unscented transform reproduces mean and covariance.
Verdict unscented_exactness() {
  static const StateField fields[] = {StateField::kY,  StateField::kVy, StateField::kX,
                                      StateField::kVx, StateField::kAy, StateField::kAx};
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> dims(1, 6);
  double worst_mean = 0.0, worst_cov = 0.0, worst_w = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dims(rng);
    WorldState w;
    RoadObject o;
    o.id = 1;
    w.others.push_back(o);
    BeliefState b = BeliefState::certain(w);
    b.mean.resize(n);
    Eigen::MatrixXd a(n, n);
    const double scale = std::exp(2.0 * g(rng));
    for (int i = 0; i < n; ++i) {
      b.dims.push_back(DimLabel{1, fields[i]});
      b.mean[i] = 20.0 * g(rng);
      for (int j = 0; j < n; ++j) a(i, j) = scale * g(rng);
    }
    b.covariance = a * a.transpose();
    for (double w0 : {-0.3, 0.0, 0.5}) {
      SigmaPointOptions opt;
      opt.w0 = w0;
      opt.closeness_epsilon = {0.0};
      const auto set = generate_sigma_points(b, opt);
      const auto [m, c] = reconstruct_moments(set, b.dims);
      const double em = (m - b.mean).cwiseAbs().maxCoeff();
      const double ec = (c - b.covariance).norm() / b.covariance.norm();
      const double ew = std::abs(set.total_weight() - 1.0);
      worst_mean = std::max(worst_mean, em);
      worst_cov = std::max(worst_cov, ec);
      worst_w = std::max(worst_w, ew);
      ok = ok && em <= 1e-9 && ec <= 1e-6 && ew <= 1e-12 && set.n_effective == n;
    }
  }
  return {ok, fmt("600 sets: max mean err %.2e, max rel cov err %.2e, max |sum w - 1| %.2e",
                  worst_mean, worst_cov, worst_w)};
}

// 6. The three-point construction on the merging vehicle's speed.
Verdict merge_sigma_points() {
  bool ok = true;
  for (double sigma : {4.0, 1.5, 0.25}) {
    const auto truth = config("scenario2.ini").scenario.initial_world();
    const auto b = scenario2_belief(truth, VelocityMeasurement{20.0, sigma});
    const auto set = generate_sigma_points(b, {0.5, {1e-3}, {}});
    if (set.points.size() != 3) return {false, fmt("sigma %.2f: %zu points", sigma, set.points.size())};
    const double want[] = {20.0, 20.0 + std::sqrt(2.0) * sigma, 20.0 - std::sqrt(2.0) * sigma};
    const double wt[] = {0.5, 0.25, 0.25};
    for (int i = 0; i < 3; ++i) {
      ok = ok && std::abs(set.points[i].world.find(kMergingId)->state.vy - want[i]) <= 1e-12 &&
           set.points[i].weight == wt[i];
    }
  }
  return {ok, "points {mu, mu+sqrt2 sigma, mu-sqrt2 sigma}, weights {0.5, 0.25, 0.25} for sigma 4, 1.5, 0.25"};
}

// 7. Merge ordering under the pessimistic seed.
Verdict merge_ordering() {
  std::uint64_t seed = 1;
  while (tracking_error_draw(seed) >= -1.0) ++seed;
  double hw[3], jk[3];
  const PlannerKind kinds[] = {PlannerKind::kMctsGenie, PlannerKind::kMctsNoisy,
                               PlannerKind::kRaQmdp};
  for (int k = 0; k < 3; ++k) {
    auto c = config("scenario2.ini");
    c.planner.kind = kinds[k];
    const auto s = run_episode(c.scenario, c.planner, seed).summary;
    if (!s.merge || s.crash) return {false, fmt("%s: no clean merge", to_string(kinds[k]))};
    hw[k] = s.merge->headway;
    jk[k] = s.max_abs_jerk;
  }
  const bool ok = hw[2] > hw[1] && hw[0] > 1.0 && jk[1] > jk[2] && jk[2] > jk[0];
  return {ok, fmt("seed %llu (z=%.2f): headway Genie %.2f Noisy %.2f RA %.2f s; "
                  "max jerk Genie %.2f Noisy %.2f RA %.2f",
                  static_cast<unsigned long long>(seed), tracking_error_draw(seed), hw[0], hw[1],
                  hw[2], jk[0], jk[1], jk[2])};
}

// 8. Search against value iteration on the grid. C is scaled to the grid's
// return range (+-10).
Verdict grid_oracle() {
  const oracle::ValueIteration vi(0.95);
  SearchConfig cfg;
  cfg.discount = 0.95;
  cfg.budget = 20000;
  cfg.c_uct = 10.0;
  cfg.epsilon_root = 1.0;
  int hits = 0, total = 0, worst_seed = 1 << 30;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    int seed_hits = 0, seed_total = 0;
    for (int r = 0; r < oracle::kSize; ++r) {
      for (int c = 0; c < oracle::kSize; ++c) {
        const oracle::Cell s{r, c};
        if (oracle::terminal(s)) continue;
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r * oracle::kSize + c)));
        const auto res = search(s, oracle::GridMdp{}, cfg, rng);
        const auto best = std::max_element(res.q.begin(), res.q.end()) - res.q.begin();
        seed_hits += vi.optimal(s, res.actions[best]) ? 1 : 0;
        ++seed_total;
      }
    }
    hits += seed_hits;
    total += seed_total;
    worst_seed = std::min(worst_seed, seed_hits);
  }
  const double frac = static_cast<double>(hits) / total;
  return {frac >= 0.95, fmt("%d/%d start states optimal (%.1f%%), worst seed %d/23", hits, total,
                            100.0 * frac, worst_seed)};
}

// 9. Aggregation properties over random tables.
Verdict qmdp_properties() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> w(0.01, 1.0), q(-2000.0, 100.0);
  std::uniform_int_distribution<int> pts(1, 9);
  int failures = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<PointQ> table(static_cast<std::size_t>(pts(rng)));
    double total = 0.0;
    for (auto& p : table) {
      p.weight = w(rng);
      total += p.weight;
      for (int a = 0; a < 5; ++a) p.q.push_back(q(rng));
    }
    double rest = 0.0;
    for (std::size_t i = 1; i < table.size(); ++i) {
      table[i].weight /= total;
      rest += table[i].weight;
    }
    table[0].weight = 1.0 - rest;

    const auto e = aggregate(table);
    auto shuffled = table;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto ep = aggregate(shuffled);
    auto padded = table;
    padded.push_back(PointQ{0.0, {q(rng), q(rng), q(rng), q(rng), q(rng)}});
    const auto ez = aggregate(padded);
    std::size_t greedy = 0;
    for (std::size_t a = 0; a < 5; ++a) {
      const auto& x = e.actions[a];
      if (x.mean != ep.actions[a].mean || x.variance != ep.actions[a].variance) ++failures;
      if (x.mean != ez.actions[a].mean || x.variance != ez.actions[a].variance) ++failures;
      if (x.variance < 0.0) ++failures;
      if (x.mean > e.actions[greedy].mean) greedy = a;
    }
    if (select_risk_averse(e, {0.0}) != greedy) ++failures;
  }
  return {failures == 0, fmt("1000 tables, %d violations", failures)};
}

// 10. Byte-identical telemetry across repeated runs.
Verdict determinism() {
  struct Case {
    const char* file;
    PlannerKind kind;
    std::uint64_t seed;
  };
  const Case cases[] = {{"scenario1.ini", PlannerKind::kRaQmdp, 1},
                        {"scenario1.ini", PlannerKind::kMctsP1, 7},
                        {"scenario2.ini", PlannerKind::kRaQmdp, 4},
                        {"scenario2.ini", PlannerKind::kMctsNoisy, 2}};
  int same = 0;
  for (const auto& c : cases) {
    auto cfg = config(c.file);
    cfg.planner.kind = c.kind;
    const auto a = run_episode(cfg.scenario, cfg.planner, c.seed);
    const auto b = run_episode(cfg.scenario, cfg.planner, c.seed);
    same += ticks_csv(a) == ticks_csv(b) && decisions_csv(a) == decisions_csv(b) ? 1 : 0;
  }
  return {same == 4, fmt("%d/4 (scenario, planner, seed) cases byte-identical", same)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"safe-distance table", safe_distance_table},
      {"crash threshold", crash_threshold},
      {"velocity-jerk ordering", tradeoff_ordering},
      {"root exploration ablation", epsilon_ablation},
      {"unscented transform exactness", unscented_exactness},
      {"merge sigma points", merge_sigma_points},
      {"merge ordering", merge_ordering},
      {"search vs value iteration", grid_oracle},
      {"aggregation properties", qmdp_properties},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s  %s: %s (%.1fs)\n", id, v.pass ? "PASS" : "FAIL",
                criteria[i].first, v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
