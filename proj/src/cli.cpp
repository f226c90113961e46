#include "evcoord/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evcoord/config.hpp"
#include "evcoord/errors.hpp"
#include "evcoord/loadflow.hpp"
#include "evcoord/scenario_io.hpp"
#include "evcoord/sensitivity.hpp"
#include "evcoord/table.hpp"

namespace evcoord {
namespace {

// Options shared by every subcommand, filled by CLI11.
struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<std::string> metric;
  std::optional<int> draws;
  std::vector<int> fleet_sizes;  // empty means "keep the configured sizes"
  bool serial = false;
  bool verbose = false;
};

void add_common_options(CLI::App& cmd, CliOptions& opt) {
  cmd.add_option("--config", opt.config_path, "Run configuration file (JSON)")
      ->required();
  cmd.add_option("--out", opt.out_dir, "Output directory (created when missing)");
  cmd.add_option("--seed", opt.seed, "Override the configured seed");
  cmd.add_flag("-v,--verbose", opt.verbose, "Timing and progress notes on stderr");
}

std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

void emit(const std::filesystem::path& out_dir, const std::string& name,
          const std::string& content) {
  const std::string path = (out_dir / name).string();
  write_text_file(path, content);
  std::cout << "wrote " << path << '\n';
}

RunConfig load_with_overrides(const CliOptions& opt) {
  RunConfig config = load_run_config(opt.config_path);
  if (opt.seed) {
    config.seed = *opt.seed;
    config.montecarlo.master_seed = *opt.seed;
  }
  if (opt.policy) config.scenario.policy = policy_from_string(*opt.policy);
  if (opt.metric) {
    if (*opt.metric == "quadratic")
      config.scenario.metric = PenaltyKind::Quadratic;
    else if (*opt.metric == "crenel")
      config.scenario.metric = PenaltyKind::Crenel;
    else
      throw ConfigError("--metric must be 'quadratic' or 'crenel'");
  }
  if (opt.draws) {
    if (*opt.draws < 1) throw ConfigError("--draws must be at least 1");
    config.montecarlo.draws = *opt.draws;
  }
  if (!opt.fleet_sizes.empty()) config.montecarlo.fleet_sizes = opt.fleet_sizes;
  if (opt.serial) config.montecarlo.mode = ExecutionMode::Serial;
  return config;
}

// Base-load operating point: what the feeder looks like before any vehicle
// draws power.
LoadFlowSolution solve_idle(const FeederModel& model, const LoadFlowOptions& flow) {
  std::vector<double> p(model.n()), q(model.n());
  for (int i = 0; i < model.n(); ++i) {
    p[i] = model.buses()[i].is_slack ? 0.0 : -model.buses()[i].base_load_p_kw;
    q[i] = model.buses()[i].is_slack ? 0.0 : -model.buses()[i].base_load_q_kvar;
  }
  return solve_load_flow(model, p, q, flow);
}

int cmd_solve(const CliOptions& opt) {
  const RunConfig config = load_with_overrides(opt);
  const FeederModel model = load_configured_feeder(config);
  const auto out_dir = prepare_out_dir(opt.out_dir);
  const LoadFlowSolution solution = solve_idle(model, config.scenario.flow);
  emit(out_dir, "solution.csv", serialize_solution(model, solution));
  return 0;
}

int cmd_sensitivity(const CliOptions& opt) {
  const RunConfig config = load_with_overrides(opt);
  const FeederModel model = load_configured_feeder(config);
  const auto out_dir = prepare_out_dir(opt.out_dir);

  const LoadFlowSolution solution = solve_idle(model, config.scenario.flow);
  const std::vector<int> pilots = config.scenario.pilot_nodes.empty()
                                      ? model.load_bus_ids()
                                      : config.scenario.pilot_nodes;
  const Eigen::MatrixXd jacobian = compute_jacobian(model, solution);
  const SensitivityMatrix sens =
      extract_sensitivity(model, jacobian, solution, pilots, model.load_bus_ids());
  emit(out_dir, "solution.csv", serialize_solution(model, solution));
  emit(out_dir, "sensitivity.csv", serialize_sensitivity(sens));
  return 0;
}

int cmd_scenario(const CliOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig config = load_with_overrides(opt);
  const FeederModel model = load_configured_feeder(config);
  finalize_run_config(config, model);
  const auto out_dir = prepare_out_dir(opt.out_dir);

  const FleetSample sample = resolve_fleet(config, model);
  for (const std::string& warning : sample.warnings)
    std::cerr << "warning: " << warning << '\n';

  const ScenarioResult result = run_scenario(model, sample.vehicles, config.scenario);

  emit(out_dir, "slot_results.csv", serialize_slot_results(result));
  emit(out_dir, "summary.csv", serialize_run_summary(result.summary));
  emit(out_dir, "vehicles.csv", serialize_vehicle_summary(sample.vehicles, result));
  emit(out_dir, "fleet.csv", serialize_fleet(sample.vehicles));
  const std::string label = to_string(config.scenario.policy);
  emit(out_dir, "voltage_profile.csv",
       serialize_voltage_profile(model, {label}, {&result}));
  if (policy_uses_brd(config.scenario.policy))
    emit(out_dir, "trace.csv", serialize_traces(result, sample.vehicles));

  if (opt.verbose) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::cerr << "scenario: " << result.slots.size() << " slots, "
              << sample.vehicles.size() << " vehicles, " << dt.count() << " s\n";
  }
  return 0;
}

int cmd_montecarlo(const CliOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig config = load_with_overrides(opt);
  const FeederModel model = load_configured_feeder(config);
  finalize_run_config(config, model);
  const auto out_dir = prepare_out_dir(opt.out_dir);

  const MonteCarloReport report = run_monte_carlo(model, config.montecarlo);
  emit(out_dir, "report.csv", serialize_monte_carlo_report(report));
  emit(out_dir, "draws.csv", serialize_monte_carlo_draws(report));

  if (opt.verbose) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::cerr << "montecarlo: " << report.cells.size() << " cells, " << dt.count() << " s\n";
  }
  return 0;
}

int cmd_calibrate(const CliOptions& opt) {
  RunConfig config = load_with_overrides(opt);
  // The only randomness here is the stress draw, so the seed override
  // targets it directly.
  if (opt.seed) config.calibration.seed = *opt.seed;
  const auto out_dir = prepare_out_dir(opt.out_dir);

  const CalibrationResult result = calibrate_surrogate(config.calibration);
  const FeederModel model = surrogate_feeder(result.section_ohm);
  emit(out_dir, "feeder_calibrated.fdr", serialize_feeder(model));
  emit(out_dir, "calibration.csv", serialize_calibration(result));
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"EV charging coordination study on a radial feeder"};
  app.require_subcommand(1);

  CliOptions opt;
  CLI::App* solve = app.add_subcommand("solve", "Solve the base-load operating point");
  CLI::App* sensitivity =
      app.add_subcommand("sensitivity", "Voltage sensitivity at the operating point");
  CLI::App* scenario = app.add_subcommand("scenario", "Simulate one charging horizon");
  CLI::App* montecarlo =
      app.add_subcommand("montecarlo", "Policy comparison over random fleets");
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "Scale the bundled feeder to a stress target");

  for (CLI::App* cmd : {solve, sensitivity, scenario, montecarlo, calibrate})
    add_common_options(*cmd, opt);
  for (CLI::App* cmd : {scenario, montecarlo}) {
    cmd->add_option("--policy", opt.policy,
                    "uncoordinated|droop|global-async|global-sync|local-async|local-sync");
    cmd->add_option("--metric", opt.metric, "quadratic|crenel");
  }
  montecarlo->add_option("--draws", opt.draws, "Fleet draws per size");
  montecarlo->add_option("--fleet-sizes", opt.fleet_sizes, "Comma-separated sizes")
      ->delimiter(',');
  montecarlo->add_flag("--serial", opt.serial, "Disable the parallel harness");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("evcoord");
  for (const std::string& arg : args) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) return cmd_solve(opt);
    if (sensitivity->parsed()) return cmd_sensitivity(opt);
    if (scenario->parsed()) return cmd_scenario(opt);
    if (montecarlo->parsed()) return cmd_montecarlo(opt);
    return cmd_calibrate(opt);
  } catch (const InfeasibilityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace evcoord
