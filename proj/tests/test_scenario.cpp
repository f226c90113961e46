#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "evcoord/baselines.hpp"
#include "evcoord/calibrate.hpp"
#include "evcoord/errors.hpp"
#include "evcoord/loadflow.hpp"
#include "evcoord/rng.hpp"
#include "evcoord/scenario.hpp"
#include "test_util.hpp"

using namespace evcoord;

namespace {

// Short evening horizon: 18:00 to 23:00 in half-hour slots (10 slots).
Horizon short_horizon() {
  Horizon h;
  h.start_min = 18 * 60;
  h.end_min = 23 * 60;
  h.slot_minutes = 30;
  return h;
}

Vehicle make_vehicle(int id, int node, double soc_init, double target, int arrival,
                     int departure) {
  Vehicle v;
  v.id = id;
  v.node = node;
  v.soc_init_kwh = soc_init;
  v.soc_min_kwh = target;
  v.soc_max_kwh = target;
  v.p_max_kw = 3.3;
  v.arrival_slot = arrival;
  v.departure_slot = departure;
  return v;
}

bool scenario_results_identical(const ScenarioResult& a, const ScenarioResult& b) {
  if (a.slots.size() != b.slots.size()) return false;
  for (std::size_t s = 0; s < a.slots.size(); ++s) {
    if (a.slots[s].p_kw != b.slots[s].p_kw) return false;
    if (a.slots[s].v_min_pu != b.slots[s].v_min_pu) return false;
    if (a.slots[s].turns != b.slots[s].turns) return false;
  }
  for (std::size_t i = 0; i < a.final_soc.size(); ++i)
    if (a.final_soc[i].soc_kwh != b.final_soc[i].soc_kwh) return false;
  return a.summary.min_v_pu == b.summary.min_v_pu &&
         a.summary.total_penalty_quadratic == b.summary.total_penalty_quadratic &&
         a.summary.energy_delivered_kwh == b.summary.energy_delivered_kwh;
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("uncoordinated single vehicle charges at full power until the battery fills") {
    const FeederModel model = evtest::two_bus_feeder(0.16, 0.16, 1.0, 0.2);
    // Needs 4.8 kWh in slots [2, 9): two full-rate slots then one partial.
    const std::vector<Vehicle> fleet{make_vehicle(0, 2, 19.2, 24.0, 2, 9)};

    ScenarioConfig config;
    config.horizon = short_horizon();
    config.policy = PolicyKind::Uncoordinated;
    const ScenarioResult result = run_scenario(model, fleet, config);

    REQUIRE(result.slots.size() == 10);
    CHECK(result.slots[0].vehicle_ids.empty());
    CHECK(result.slots[1].vehicle_ids.empty());
    REQUIRE(result.slots[2].vehicle_ids == std::vector<int>{0});
    CHECK(result.slots[2].p_kw[0] == doctest::Approx(3.3).epsilon(1e-14));
    CHECK(result.slots[3].p_kw[0] == doctest::Approx(3.3).epsilon(1e-14));
    CHECK(result.slots[4].p_kw[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(result.slots[5].p_kw[0] == doctest::Approx(0.0));
    CHECK(result.slots[8].p_kw[0] == doctest::Approx(0.0));

    // Charging sags the feeder below its idle level.
    CHECK(result.slots[2].v_min_pu < result.slots[0].v_min_pu);
    CHECK(result.summary.min_v_node == 2);
    CHECK(result.summary.report_node == 2);
    CHECK(result.summary.min_v_pu == result.summary.min_v_report_node_pu);

    CHECK(result.summary.energy_delivered_kwh == doctest::Approx(4.8).epsilon(1e-12));
    REQUIRE(result.final_soc.size() == 1);
    CHECK(result.final_soc[0].soc_kwh == doctest::Approx(24.0).epsilon(1e-12));
    CHECK(result.summary.soc_violations == 0);

    // A trailing empty slot reuses the operating solution instead of solving
    // twice; a slot with a vehicle solves the applied powers separately.
    CHECK(result.slots[2].flow_iterations > 0);
    CHECK(result.slots[0].trace.empty());
  }

  TEST_CASE("energy delivered matches the battery gains") {
    const FeederModel model = surrogate_feeder(0.0224);
    FleetSpec spec;
    spec.n_vehicles = 8;
    Horizon horizon;  // default evening-to-morning window
    const FleetSample sample = sample_fleet(spec, horizon, model.load_bus_ids(), 11);

    ScenarioConfig config;
    config.horizon = horizon;
    for (const PolicyKind policy :
         {PolicyKind::Uncoordinated, PolicyKind::Droop, PolicyKind::GlobalAsync}) {
      config.policy = policy;
      const ScenarioResult result = run_scenario(model, sample.vehicles, config);
      double gained = 0.0;
      for (std::size_t i = 0; i < sample.vehicles.size(); ++i) {
        gained += result.final_soc[i].soc_kwh - sample.vehicles[i].soc_init_kwh;
        CHECK(result.final_soc[i].soc_kwh >= sample.vehicles[i].soc_min_kwh - 1e-9);
        CHECK(result.final_soc[i].soc_kwh <= sample.vehicles[i].soc_max_kwh + 1e-9);
      }
      CHECK(result.summary.energy_delivered_kwh == doctest::Approx(gained).epsilon(1e-10));
      CHECK(result.summary.soc_violations == 0);
    }
  }

  TEST_CASE("droop reads the voltage solved in the previous slot") {
    // Heavy base load keeps the idle voltage inside the droop ramp, so the
    // curve output changes every slot and the lag is observable.
    const FeederModel model = evtest::two_bus_feeder(0.16, 0.16, 55.0, 11.0);
    const std::vector<Vehicle> fleet{make_vehicle(0, 2, 16.0, 24.0, 0, 10)};

    ScenarioConfig config;
    config.horizon = short_horizon();
    config.policy = PolicyKind::Droop;
    const ScenarioResult result = run_scenario(model, fleet, config);

    // First slot: no history yet, so the measurement is this slot's
    // operating point, which carries no charging load.
    LoadFlowOptions flow;
    const LoadFlowSolution idle = solve_load_flow(
        model, evtest::negated_base_loads_p(model), evtest::negated_base_loads_q(model), flow);
    const int load_index = model.index_of(2);
    CHECK(idle.v_mag[load_index] > 0.90);
    CHECK(idle.v_mag[load_index] < 0.95);

    const PowerBounds bounds0 = result.slots[0].bounds[0];
    const double expected0 = droop_power(idle.v_mag[load_index], config.droop, bounds0);
    CHECK(result.slots[0].p_kw[0] == expected0);

    // Later slots: the measurement is the previous slot's solved state, with
    // the previous charging power included.
    for (int slot = 1; slot < 4; ++slot) {
      const double v_prev = result.slots[slot - 1].solution.v_mag[load_index];
      const PowerBounds bounds = result.slots[slot].bounds[0];
      CHECK(result.slots[slot].p_kw[0] == droop_power(v_prev, config.droop, bounds));
    }
    // The lagged feedback actually moved the setpoint between slots.
    CHECK(result.slots[1].p_kw[0] != result.slots[0].p_kw[0]);
  }

  TEST_CASE("best-response coordination leaves an unstressed feeder at full power") {
    const FeederModel model = evtest::two_bus_feeder(0.16, 0.16, 1.0, 0.2);
    const std::vector<Vehicle> fleet{make_vehicle(0, 2, 16.0, 24.0, 0, 10)};

    ScenarioConfig config;
    config.horizon = short_horizon();
    config.policy = PolicyKind::Uncoordinated;
    const ScenarioResult plain = run_scenario(model, fleet, config);
    config.policy = PolicyKind::GlobalAsync;
    const ScenarioResult brd = run_scenario(model, fleet, config);

    REQUIRE(plain.slots.size() == brd.slots.size());
    for (std::size_t s = 0; s < plain.slots.size(); ++s) {
      REQUIRE(plain.slots[s].p_kw.size() == brd.slots[s].p_kw.size());
      for (std::size_t i = 0; i < plain.slots[s].p_kw.size(); ++i)
        CHECK(plain.slots[s].p_kw[i] == brd.slots[s].p_kw[i]);
    }
    CHECK(plain.summary.min_v_pu == brd.summary.min_v_pu);
    CHECK(brd.summary.min_v_pu > 0.95);
  }

  TEST_CASE("both penalty totals accumulate whatever metric coordination uses") {
    const FeederModel model = surrogate_feeder(0.0224);
    FleetSpec spec;
    spec.n_vehicles = 30;
    Horizon horizon;
    const FleetSample sample = sample_fleet(spec, horizon, model.load_bus_ids(), 3);

    ScenarioConfig config;
    config.horizon = horizon;
    config.policy = PolicyKind::Uncoordinated;
    config.metric = PenaltyKind::Crenel;
    const ScenarioResult result = run_scenario(model, sample.vehicles, config);

    CHECK(result.summary.total_penalty_quadratic > 0.0);
    CHECK(result.summary.total_penalty_crenel > 0.0);
    // The crenel total counts bus-slot violations, so it is a whole number.
    CHECK(result.summary.total_penalty_crenel ==
          doctest::Approx(std::round(result.summary.total_penalty_crenel)).epsilon(1e-12));
  }

  TEST_CASE("report node defaults to the highest bus id and rejects unknown ids") {
    const FeederModel model = surrogate_feeder(0.03);
    FleetSpec spec;
    spec.n_vehicles = 2;
    Horizon horizon;
    const FleetSample sample = sample_fleet(spec, horizon, model.load_bus_ids(), 5);

    ScenarioConfig config;
    config.horizon = horizon;
    config.policy = PolicyKind::Uncoordinated;
    CHECK(run_scenario(model, sample.vehicles, config).summary.report_node == 34);

    config.report_node = 17;
    CHECK(run_scenario(model, sample.vehicles, config).summary.report_node == 17);

    config.report_node = 99;
    CHECK_THROWS_AS(run_scenario(model, sample.vehicles, config), ConfigError);
  }

  TEST_CASE("local policies require a neighborhood map") {
    const FeederModel model = evtest::two_bus_feeder();
    const std::vector<Vehicle> fleet{make_vehicle(0, 2, 16.0, 24.0, 0, 10)};
    ScenarioConfig config;
    config.horizon = short_horizon();
    config.policy = PolicyKind::LocalAsync;
    CHECK_THROWS_AS(run_scenario(model, fleet, config), ConfigError);
  }

  TEST_CASE("scenario runs are deterministic") {
    const FeederModel model = surrogate_feeder(0.0224);
    FleetSpec spec;
    spec.n_vehicles = 12;
    Horizon horizon;
    const FleetSample sample = sample_fleet(spec, horizon, model.load_bus_ids(), 21);

    ScenarioConfig config;
    config.horizon = horizon;
    config.policy = PolicyKind::GlobalAsync;
    const ScenarioResult first = run_scenario(model, sample.vehicles, config);
    const ScenarioResult second = run_scenario(model, sample.vehicles, config);
    CHECK(scenario_results_identical(first, second));
  }

  TEST_CASE("monte carlo report shape, statistics, and cell seeds") {
    const FeederModel model = surrogate_feeder(0.0224);
    MonteCarloConfig config;
    config.fleet_sizes = {3, 5};
    config.draws = 3;
    config.master_seed = 7;
    config.policies = {PolicyKind::Uncoordinated, PolicyKind::Droop};
    config.scenario.neighborhoods =
        two_zone_neighborhoods(model.load_bus_ids(), model.load_bus_ids(), 15);

    const MonteCarloReport report = run_monte_carlo(model, config);
    REQUIRE(report.cells.size() == 6);
    REQUIRE(report.mean_min_v.size() == 2);
    REQUIRE(report.mean_min_v[0].size() == 2);

    // Cells are fleet-size major and reproducible from their derived seed.
    for (std::size_t s = 0; s < 2; ++s) {
      for (int d = 0; d < 3; ++d) {
        const MonteCarloCell& cell = report.cells[s * 3 + d];
        CHECK(cell.fleet_size == config.fleet_sizes[s]);
        CHECK(cell.draw == d);
        CHECK(cell.seed == derive_seed(7, s, static_cast<std::uint64_t>(d)));

        FleetSpec spec = config.fleet;
        spec.n_vehicles = cell.fleet_size;
        const FleetSample sample =
            sample_fleet(spec, config.scenario.horizon, model.load_bus_ids(), cell.seed);
        ScenarioConfig scenario = config.scenario;
        scenario.policy = PolicyKind::Uncoordinated;
        const ScenarioResult run = run_scenario(model, sample.vehicles, scenario);
        CHECK(cell.min_v_report_pu[0] == run.summary.min_v_report_node_pu);
      }
    }

    // Mean over draws matches a direct recomputation; the population spread
    // of three distinct draws is positive.
    for (std::size_t s = 0; s < 2; ++s) {
      double sum = 0.0;
      for (int d = 0; d < 3; ++d) sum += report.cells[s * 3 + d].min_v_report_pu[1];
      CHECK(report.mean_min_v[s][1] == doctest::Approx(sum / 3.0).epsilon(1e-15));
      CHECK(report.std_min_v[s][1] > 0.0);
    }
  }

  TEST_CASE("a single draw reports exactly zero spread") {
    const FeederModel model = evtest::two_bus_feeder();
    MonteCarloConfig config;
    config.fleet_sizes = {1};
    config.draws = 1;
    config.policies = {PolicyKind::Uncoordinated};
    const MonteCarloReport report = run_monte_carlo(model, config);
    CHECK(report.std_min_v[0][0] == 0.0);
    CHECK(report.mean_min_v[0][0] == report.cells[0].min_v_report_pu[0]);
  }

  TEST_CASE("serial and parallel monte carlo runs are bit-identical") {
    const FeederModel model = surrogate_feeder(0.0224);
    MonteCarloConfig config;
    config.fleet_sizes = {4, 8};
    config.draws = 4;
    config.master_seed = 13;
    config.policies = {PolicyKind::Uncoordinated, PolicyKind::Droop, PolicyKind::GlobalAsync,
                       PolicyKind::LocalAsync};
    config.scenario.neighborhoods =
        two_zone_neighborhoods(model.load_bus_ids(), model.load_bus_ids(), 15);

    config.mode = ExecutionMode::Serial;
    const MonteCarloReport serial = run_monte_carlo(model, config);
    config.mode = ExecutionMode::OpenMP;
    const MonteCarloReport parallel = run_monte_carlo(model, config);

    REQUIRE(serial.cells.size() == parallel.cells.size());
    for (std::size_t i = 0; i < serial.cells.size(); ++i) {
      CHECK(serial.cells[i].seed == parallel.cells[i].seed);
      REQUIRE(serial.cells[i].min_v_report_pu.size() ==
              parallel.cells[i].min_v_report_pu.size());
      for (std::size_t p = 0; p < serial.cells[i].min_v_report_pu.size(); ++p)
        CHECK(serial.cells[i].min_v_report_pu[p] == parallel.cells[i].min_v_report_pu[p]);
    }
    for (std::size_t s = 0; s < serial.mean_min_v.size(); ++s)
      for (std::size_t p = 0; p < serial.mean_min_v[s].size(); ++p) {
        CHECK(serial.mean_min_v[s][p] == parallel.mean_min_v[s][p]);
        CHECK(serial.std_min_v[s][p] == parallel.std_min_v[s][p]);
      }
  }

  TEST_CASE("every policy honors battery limits on a stressed feeder") {
    const FeederModel model = surrogate_feeder(0.0224);
    FleetSpec spec;
    spec.n_vehicles = 20;
    Horizon horizon;
    const FleetSample sample = sample_fleet(spec, horizon, model.load_bus_ids(), 17);

    ScenarioConfig config;
    config.horizon = horizon;
    config.neighborhoods =
        two_zone_neighborhoods(model.load_bus_ids(), model.load_bus_ids(), 15);

    for (const PolicyKind policy :
         {PolicyKind::Uncoordinated, PolicyKind::Droop, PolicyKind::GlobalAsync,
          PolicyKind::GlobalSync, PolicyKind::LocalAsync, PolicyKind::LocalSync}) {
      config.policy = policy;
      const ScenarioResult result = run_scenario(model, sample.vehicles, config);
      CHECK(result.summary.soc_violations == 0);
      for (std::size_t i = 0; i < sample.vehicles.size(); ++i) {
        CHECK(result.final_soc[i].soc_kwh >= sample.vehicles[i].soc_min_kwh - 1e-9);
        CHECK(result.final_soc[i].soc_kwh <= sample.vehicles[i].soc_max_kwh + 1e-9);
      }
      // Power stayed inside the per-slot bounds.
      for (const SlotResult& slot : result.slots)
        for (std::size_t i = 0; i < slot.p_kw.size(); ++i) {
          CHECK(slot.p_kw[i] >= slot.bounds[i].p_lo_kw - 1e-12);
          CHECK(slot.p_kw[i] <= slot.bounds[i].p_hi_kw + 1e-12);
        }
    }
  }

  TEST_CASE("policy names round-trip") {
    for (const PolicyKind kind :
         {PolicyKind::Uncoordinated, PolicyKind::Droop, PolicyKind::GlobalAsync,
          PolicyKind::GlobalSync, PolicyKind::LocalAsync, PolicyKind::LocalSync})
      CHECK(policy_from_string(to_string(kind)) == kind);
    CHECK_THROWS_AS(policy_from_string("greedy"), ConfigError);
    CHECK(!policy_uses_brd(PolicyKind::Droop));
    CHECK(policy_uses_brd(PolicyKind::LocalSync));
  }
}
