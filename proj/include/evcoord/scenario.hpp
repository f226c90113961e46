#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evcoord/baselines.hpp"
#include "evcoord/coordination.hpp"
#include "evcoord/feeder.hpp"
#include "evcoord/fleet.hpp"
#include "evcoord/horizon.hpp"
#include "evcoord/loadflow.hpp"
#include "evcoord/metrics.hpp"

namespace evcoord {

// Charging strategy applied to every vehicle over the horizon. The first two
// need no communication; the rest iterate best responses against a shared
// linearized network model, differing in what each vehicle observes (all
// pilot nodes or only its neighborhood's) and in how updates are scheduled.
enum class PolicyKind {
  Uncoordinated,
  Droop,
  GlobalAsync,
  GlobalSync,
  LocalAsync,
  LocalSync,
};

const char* to_string(PolicyKind kind);
PolicyKind policy_from_string(const std::string& name);  // ConfigError on unknown names
bool policy_uses_brd(PolicyKind kind);

struct ScenarioConfig {
  Horizon horizon;
  PolicyKind policy = PolicyKind::GlobalAsync;
  // Round caps, the crenel search grid, and the update order; schedule and
  // scope are derived from `policy`.
  PolicyConfig brd;
  PenaltyKind metric = PenaltyKind::Quadratic;
  VoltageBand band;
  double v_ref = 0.0;
  std::vector<int> pilot_nodes;   // empty selects every non-slack bus
  NeighborhoodMap neighborhoods;  // required by the Local* policies
  DroopCurve droop;
  int report_node = 0;  // 0 selects the highest bus id (deepest by convention)
  LoadFlowOptions flow;
};

// Network and fleet state over one coordination slot, after the policy's
// charging powers were applied for real.
struct SlotResult {
  int slot = 0;
  std::vector<int> vehicle_ids;  // plugged-in vehicles, ascending id
  std::vector<int> nodes;        // their buses, same order
  std::vector<double> p_kw;      // applied charging power, same order
  std::vector<PowerBounds> bounds;
  LoadFlowSolution solution;  // solved with the applied powers
  double v_min_pu = 1.0;
  int v_min_node = 0;
  TerminationCause cause = TerminationCause::Converged;
  int rounds = 0;
  int turns = 0;
  int applied_updates = 0;
  int flow_iterations = 0;  // operating-point solve plus final solve
  IterationTrace trace;     // best-response path, empty for baselines
};

struct RunSummary {
  double min_v_pu = 1.0;  // over all buses and slots
  int min_v_node = 0;
  int min_v_slot = 0;
  int report_node = 0;
  double min_v_report_node_pu = 1.0;
  // Horizon minimum at every bus, index-aligned with the model's buses.
  std::vector<double> min_v_per_node_pu;
  // Both penalty kinds are accumulated from the solved voltages at every
  // load bus and slot, whatever metric the coordination itself used.
  double total_penalty_quadratic = 0.0;
  double total_penalty_crenel = 0.0;
  double energy_delivered_kwh = 0.0;
  int soc_violations = 0;  // vehicles short of their departure target
  int total_turns = 0;
  int total_applied_updates = 0;
  int total_flow_iterations = 0;
  int cycle_slots = 0;      // slots stopped by cycle detection
  int round_cap_slots = 0;  // slots stopped by the round cap
};

struct ScenarioResult {
  std::vector<SlotResult> slots;
  std::vector<SocState> final_soc;  // one per vehicle, id order
  RunSummary summary;
};

// Simulates the horizon slot by slot: measure the operating point, pick
// charging powers under `config.policy`, apply them through a full load
// flow, then advance every battery. The fleet must satisfy validate_fleet.
ScenarioResult run_scenario(const FeederModel& model, const std::vector<Vehicle>& fleet,
                            const ScenarioConfig& config);

enum class ExecutionMode { Serial, OpenMP };

struct MonteCarloConfig {
  std::vector<int> fleet_sizes;
  int draws = 20;
  std::uint64_t master_seed = 1;
  ExecutionMode mode = ExecutionMode::OpenMP;
  FleetSpec fleet;          // n_vehicles is overridden per fleet size
  ScenarioConfig scenario;  // policy is overridden per policy entry
  std::vector<PolicyKind> policies{PolicyKind::Uncoordinated, PolicyKind::Droop,
                                   PolicyKind::GlobalAsync, PolicyKind::LocalAsync};
};

// One sampled fleet evaluated under every policy of the study.
struct MonteCarloCell {
  int fleet_size = 0;
  int draw = 0;
  std::uint64_t seed = 0;
  std::vector<double> min_v_report_pu;  // per policy, config order
};

struct MonteCarloReport {
  std::vector<int> fleet_sizes;
  std::vector<PolicyKind> policies;
  std::vector<MonteCarloCell> cells;  // fleet-size major, then draw
  // Statistics of min_v_report_pu across draws, indexed [size][policy].
  // The standard deviation uses the population convention (n divisor), so a
  // single draw reports exactly zero.
  std::vector<std::vector<double>> mean_min_v;
  std::vector<std::vector<double>> std_min_v;
};

// Repeats fleet sampling `draws` times per fleet size and runs every policy
// on identical fleets. Cell seeds derive from (master_seed, size index,
// draw), so results do not depend on the execution mode or thread count.
MonteCarloReport run_monte_carlo(const FeederModel& model, const MonteCarloConfig& config);

}  // namespace evcoord
