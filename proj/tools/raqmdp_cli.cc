// raqmdp: run single episodes or parameter sweeps.
//
//   raqmdp run   --config PATH [--seed N] [--out DIR]
//   raqmdp sweep --spec PATH [--out DIR] [--parallel K]
//
// When --out is absent the output directory is $RAQMDP_OUT_DIR, else ./out.
// Exit status: 0 clean, 1 invalid input or planner failure, 2 crash (run) or
// any failed/crashed episode (sweep).

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "raqmdp/config.h"
#include "raqmdp/sweep.h"
#include "raqmdp/telemetry_io.h"

namespace {

std::filesystem::path out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("RAQMDP_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "out";
}

int cmd_run(const std::string& config_path, const std::optional<std::uint64_t>& seed_flag,
            const std::string& out_flag) {
  using namespace raqmdp;
  const ExperimentConfig cfg = load_config(config_path);
  const std::uint64_t seed = seed_flag.value_or(cfg.scenario.seed);
  const auto dir = out_dir(out_flag);
  Telemetry tel;
  try {
    tel = run_episode(cfg.scenario, cfg.planner, seed);
  } catch (const EpisodeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  write_file_atomic(dir / "telemetry.csv", ticks_csv(tel));
  write_file_atomic(dir / "decisions.csv", decisions_csv(tel));
  write_file_atomic(dir / "summary.json",
                    episode_json(cfg.scenario, cfg.planner, seed, tel.summary).dump(2) + "\n");
  const auto& s = tel.summary;
  std::cout << to_string(cfg.scenario.kind) << " " << to_string(cfg.planner.kind) << " seed "
            << seed << ": avg_velocity " << s.avg_velocity << " max_abs_jerk " << s.max_abs_jerk
            << " end " << to_string(s.end) << "\n";
  if (s.merge) {
    std::cout << "merge: distance " << s.merge->distance << " headway " << s.merge->headway
              << (s.merge->mv_ahead ? " (merging vehicle ahead)" : " (ego ahead)") << "\n";
  }
  std::cout << "wrote " << dir.string() << "\n";
  if (s.crash) {
    std::cerr << "crash at t=" << tel.ticks.back().time << "\n";
    return 2;
  }
  return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_flag, int parallel) {
  using namespace raqmdp;
  const SweepSpec spec = load_sweep_spec(spec_path);
  const ExperimentConfig base = load_config(spec.scenario);
  const auto dir = out_dir(out_flag);
  const SweepResult result = run_sweep(spec, base, parallel, dir);
  write_sweep_outputs(result, dir);
  std::cout << sweep_table_csv(result);
  std::cout << "wrote " << dir.string() << "\n";
  for (const auto& c : result.cells) {
    if (c.completed() != c.episodes.size() || c.crashes() > 0) return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-averse QMDP behaviour planning experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one episode");
  std::string config_path, run_out;
  std::optional<std::uint64_t> seed;
  run->add_option("--config", config_path, "scenario file")->required();
  run->add_option("--seed", seed, "episode seed (default: scenario.seed)");
  run->add_option("--out", run_out, "output directory");

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  std::string spec_path, sweep_out;
  int parallel = 1;
  sweep->add_option("--spec", spec_path, "sweep file")->required();
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--parallel", parallel, "worker threads")
      ->check(CLI::Range(1, 1024));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    if (run->parsed()) return cmd_run(config_path, seed, run_out);
    return cmd_sweep(spec_path, sweep_out, parallel);
  } catch (const raqmdp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}
