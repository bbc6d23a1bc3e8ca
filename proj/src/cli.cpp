#include "cavsim/cli.hpp"

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cavsim/engine.hpp"
#include "cavsim/outputs.hpp"
#include "cavsim/scenario.hpp"
#include "cavsim/trajectory.hpp"

namespace cavsim::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string num(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

void print_scenario_errors(const ScenarioError& e) {
  std::cerr << e.what() << "\n";
  for (const std::string& msg : e.errors)
    std::cerr << "  error: " << msg << "\n";
}

struct RunArgs {
  std::string scenario_file;
  std::string mode = "optimal";
  std::string tracking; ///< empty = scenario default
  double duration = -1.0;
  int reps = 0;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
};

int do_run(const RunArgs& args, bool duration_set, bool reps_set, bool seed_set) {
  ScenarioConfig config;
  try {
    config = load_scenario(args.scenario_file);
  } catch (const ScenarioError& e) {
    print_scenario_errors(e);
    return kExitUsage;
  }

  const RunMode mode = run_mode_from_string(args.mode);
  const TrackingModel tracking =
      tracking_from_string(args.tracking.empty() ? config.tracking : args.tracking);
  const double duration = duration_set ? args.duration : config.duration;
  const int reps = reps_set ? args.reps : config.repetitions;
  const std::uint64_t seed = seed_set ? args.seed : config.seed;

  const int status =
      run_experiment(config, mode, tracking, duration, reps, seed, args.out_dir);
  std::cout << "scenario " << config.name << ": " << reps << " run(s), mode "
            << to_string(mode) << ", tracking " << to_string(tracking) << ", seed "
            << seed << " -> " << args.out_dir << "\n";
  if (status == 3)
    std::cerr << "safety violations detected; see metrics.json\n";
  return status;
}

int do_validate(const std::string& scenario_file) {
  try {
    const ScenarioConfig config = load_scenario(scenario_file);
    std::cout << "OK: " << config.name << " (" << config.paths.size() << " paths, "
              << config.conflicts.size() << " conflict points, "
              << config.spawns.size() << " spawns, hash " << scenario_hash(config)
              << ")\n";
    return kExitOk;
  } catch (const ScenarioError& e) {
    print_scenario_errors(e);
    return kExitUsage;
  }
}

int do_bounds(double v0, double distance, const Limits& limits) {
  try {
    const ExitTimeBounds bounds = exit_time_bounds(v0, distance, limits);
    std::cout << "t_lb_s=" << num(bounds.t_lb) << "\n";
    std::cout << "t_ub_s=" << num(bounds.t_ub) << "\n";
    return kExitOk;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

} // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"cavsim — scaled-city connected-automated-vehicle coordination "
               "simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd =
      app.add_subcommand("run", "Simulate a scenario and write CSV/JSON outputs");
  run_cmd->add_option("--scenario", run_args.scenario_file, "Scenario file (JSON)")
      ->required();
  run_cmd->add_option("--mode", run_args.mode, "Coordination mode")
      ->check(CLI::IsMember({"optimal", "baseline"}));
  run_cmd->add_option("--duration", run_args.duration, "Simulated time [s]")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--reps", run_args.reps, "Number of repetitions")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run_args.seed, "Base random seed");
  run_cmd->add_option("--tracking", run_args.tracking, "Tracking model")
      ->check(CLI::IsMember({"exact", "lagged"}));
  run_cmd->add_option("--out", run_args.out_dir, "Output directory");

  std::string optimal_file, baseline_file;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "Report deltas between paired optimal/baseline metrics.json files");
  compare_cmd->add_option("optimal", optimal_file, "metrics.json of the optimal run")
      ->required();
  compare_cmd
      ->add_option("baseline", baseline_file, "metrics.json of the baseline run")
      ->required();

  std::string validate_file;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Check a scenario file and list every problem");
  validate_cmd->add_option("--scenario", validate_file, "Scenario file (JSON)")
      ->required();

  double v0 = 0.0, distance = 0.0;
  Limits limits;
  CLI::App* bounds_cmd = app.add_subcommand(
      "bounds", "Print the feasible control-zone exit-time window");
  bounds_cmd->add_option("--v0", v0, "Entry speed [m/s]")->required();
  bounds_cmd->add_option("--distance", distance, "Control-zone length [m]")
      ->required()
      ->check(CLI::PositiveNumber);
  bounds_cmd->add_option("--v-min", limits.v_min, "Minimum speed [m/s]");
  bounds_cmd->add_option("--v-max", limits.v_max, "Maximum speed [m/s]");
  bounds_cmd->add_option("--u-min", limits.u_min, "Minimum acceleration [m/s^2]");
  bounds_cmd->add_option("--u-max", limits.u_max, "Maximum acceleration [m/s^2]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_cmd->parsed())
      return do_run(run_args, run_cmd->count("--duration") > 0,
                    run_cmd->count("--reps") > 0, run_cmd->count("--seed") > 0);
    if (compare_cmd->parsed())
      return compare_runs(optimal_file, baseline_file, std::cout);
    if (validate_cmd->parsed())
      return do_validate(validate_file);
    if (bounds_cmd->parsed()) {
      try {
        limits.validate();
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
      }
      return do_bounds(v0, distance, limits);
    }
  } catch (const ScenarioError& e) {
    print_scenario_errors(e);
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage; // unreachable: a subcommand is required
}

} // namespace cavsim::cli
