// Times the Monte Carlo harness in its serial and OpenMP executions on the
// bundled study configuration and verifies that both produce bit-identical
// reports. Not part of the test suite; build and run it by hand when
// touching the harness or the solver hot path.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "evcoord/config.hpp"
#include "evcoord/feeder.hpp"
#include "evcoord/scenario.hpp"

using namespace evcoord;

namespace {

double run_best_of(const FeederModel& model, const MonteCarloConfig& config, int repeats,
                   MonteCarloReport& report) {
  double best_s = 1e300;
  for (int rep = 0; rep < repeats; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    report = run_monte_carlo(model, config);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    best_s = std::min(best_s, secs);
  }
  return best_s;
}

bool reports_identical(const MonteCarloReport& a, const MonteCarloReport& b) {
  if (a.cells.size() != b.cells.size()) return false;
  for (std::size_t i = 0; i < a.cells.size(); ++i)
    if (a.cells[i].seed != b.cells[i].seed ||
        a.cells[i].min_v_report_pu != b.cells[i].min_v_report_pu)
      return false;
  return a.mean_min_v == b.mean_min_v && a.std_min_v == b.std_min_v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo harness benchmark: serial vs OpenMP"};
  std::string config_path = std::string(EVCOORD_DATA_DIR) + "/scenario34.json";
  int draws = 0;        // 0 keeps the configured value
  int repeats = 3;
  std::vector<int> fleet_sizes;
  app.add_option("--config", config_path, "run configuration")->capture_default_str();
  app.add_option("--draws", draws, "fleet draws per size (0 keeps the configured value)");
  app.add_option("--fleet-sizes", fleet_sizes, "fleet sizes (empty keeps the configured list)")
      ->delimiter(',');
  app.add_option("--repeats", repeats, "timed repetitions, best one counts")
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  RunConfig config = load_run_config(config_path);
  const FeederModel model = load_configured_feeder(config);
  finalize_run_config(config, model);
  MonteCarloConfig mc = config.montecarlo;
  if (draws > 0) mc.draws = draws;
  if (!fleet_sizes.empty()) mc.fleet_sizes = fleet_sizes;

  int cells = 0;
  for (std::size_t s = 0; s < mc.fleet_sizes.size(); ++s) cells += mc.draws;
  std::printf("feeder %s, %d draws x %zu sizes x %zu policies (%d cells)\n",
              config.feeder_path.c_str(), mc.draws, mc.fleet_sizes.size(), mc.policies.size(),
              cells);

  MonteCarloReport serial_report, parallel_report;
  mc.mode = ExecutionMode::Serial;
  const double serial_s = run_best_of(model, mc, repeats, serial_report);
  mc.mode = ExecutionMode::OpenMP;
  const double parallel_s = run_best_of(model, mc, repeats, parallel_report);

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  const bool identical = reports_identical(serial_report, parallel_report);
  std::printf("serial   %8.3f s\n", serial_s);
  std::printf("openmp   %8.3f s  (%d threads, speedup %.2fx)\n", parallel_s, threads,
              serial_s / parallel_s);
  std::printf("reports %s\n", identical ? "bit-identical" : "DIFFER");
  return identical ? 0 : 1;
}
