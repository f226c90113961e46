#include "evcoord/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <utility>

#include "evcoord/errors.hpp"
#include "evcoord/rng.hpp"
#include "evcoord/sensitivity.hpp"

namespace evcoord {

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Uncoordinated: return "uncoordinated";
    case PolicyKind::Droop: return "droop";
    case PolicyKind::GlobalAsync: return "global-async";
    case PolicyKind::GlobalSync: return "global-sync";
    case PolicyKind::LocalAsync: return "local-async";
    case PolicyKind::LocalSync: return "local-sync";
  }
  return "?";
}

PolicyKind policy_from_string(const std::string& name) {
  for (const PolicyKind kind :
       {PolicyKind::Uncoordinated, PolicyKind::Droop, PolicyKind::GlobalAsync,
        PolicyKind::GlobalSync, PolicyKind::LocalAsync, PolicyKind::LocalSync})
    if (name == to_string(kind)) return kind;
  throw ConfigError("unknown policy '" + name +
                    "' (expected uncoordinated, droop, global-async, global-sync, "
                    "local-async or local-sync)");
}

bool policy_uses_brd(PolicyKind kind) {
  return kind != PolicyKind::Uncoordinated && kind != PolicyKind::Droop;
}

namespace {

std::pair<UpdateSchedule, ObjectiveScope> brd_mode(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::GlobalAsync:
      return {UpdateSchedule::Asynchronous, ObjectiveScope::Global};
    case PolicyKind::GlobalSync:
      return {UpdateSchedule::Synchronous, ObjectiveScope::Global};
    case PolicyKind::LocalAsync:
      return {UpdateSchedule::Asynchronous, ObjectiveScope::Local};
    case PolicyKind::LocalSync:
      return {UpdateSchedule::Synchronous, ObjectiveScope::Local};
    default:
      throw ContractError("brd_mode: policy has no best-response dynamics");
  }
}

int resolve_report_node(const FeederModel& model, int requested) {
  if (requested == 0) {
    int deepest = model.id_of(0);
    for (const Bus& bus : model.buses()) deepest = std::max(deepest, bus.id);
    return deepest;
  }
  if (!model.has_bus(requested))
    throw ConfigError("report node " + std::to_string(requested) + " is not in the feeder");
  return requested;
}

}  // namespace

ScenarioResult run_scenario(const FeederModel& model, const std::vector<Vehicle>& fleet,
                            const ScenarioConfig& config) {
  config.horizon.validate();
  const int n_slots = config.horizon.n_slots();
  const double dt = config.horizon.slot_hours();
  validate_fleet(fleet, n_slots);
  for (const Vehicle& veh : fleet)
    if (model.index_of(veh.node) == model.slack_index())
      throw ModelError("vehicle " + std::to_string(veh.id) + " plugs into the slack bus");

  const std::vector<int> pilots =
      config.pilot_nodes.empty() ? model.load_bus_ids() : config.pilot_nodes;
  const bool brd = policy_uses_brd(config.policy);
  PolicyConfig brd_policy = config.brd;
  if (brd) {
    const auto [schedule, scope] = brd_mode(config.policy);
    brd_policy.schedule = schedule;
    brd_policy.scope = scope;
    if (scope == ObjectiveScope::Local && config.neighborhoods.neighborhood_of_node.empty())
      throw ConfigError(std::string("policy '") + to_string(config.policy) +
                        "' needs a neighborhood map");
  }

  const int report_node = resolve_report_node(model, config.report_node);
  const int report_index = model.index_of(report_node);

  // Injections with only the household load; vehicle charging subtracts on
  // top of this per slot (consumption enters the solver negative).
  const int n = model.n();
  std::vector<double> base_p(n), base_q(n);
  for (int i = 0; i < n; ++i) {
    base_p[i] = -model.buses()[i].base_load_p_kw;
    base_q[i] = -model.buses()[i].base_load_q_kvar;
  }

  ScenarioResult result;
  result.slots.reserve(n_slots);
  result.summary.report_node = report_node;
  result.summary.min_v_per_node_pu.assign(n, std::numeric_limits<double>::infinity());

  result.final_soc.resize(fleet.size());
  for (const Vehicle& veh : fleet)
    result.final_soc[veh.id] = SocState{veh.id, veh.soc_init_kwh, veh.arrival_slot};
  std::vector<double> prev_applied_kw(fleet.size(), 0.0);

  LoadFlowSolution prev_true;  // solved state of the previous slot
  bool have_prev = false;

  for (int t = 0; t < n_slots; ++t) {
    SlotResult slot;
    slot.slot = t;

    for (const Vehicle& veh : fleet) {
      if (t < veh.arrival_slot || t >= veh.departure_slot) continue;
      slot.vehicle_ids.push_back(veh.id);
      slot.nodes.push_back(veh.node);
      slot.bounds.push_back(power_bounds(veh, result.final_soc[veh.id], t, dt));
    }
    const std::size_t present = slot.vehicle_ids.size();

    // Operating point: the network as the controller measures it, with every
    // plugged-in vehicle still drawing its previous-slot power.
    std::vector<double> op_p = base_p;
    std::vector<SlotVehicleState> states(present);
    for (std::size_t k = 0; k < present; ++k) {
      SlotVehicleState& st = states[k];
      st.vehicle_id = slot.vehicle_ids[k];
      st.node = slot.nodes[k];
      st.bounds = slot.bounds[k];
      st.p_operating_kw = prev_applied_kw[st.vehicle_id];
      op_p[model.index_of(st.node)] -= st.p_operating_kw;
    }
    const LoadFlowSolution op_sol =
        solve_load_flow(model, op_p, base_q, config.flow, have_prev ? &prev_true : nullptr);
    slot.flow_iterations += op_sol.iterations;

    slot.p_kw.resize(present);
    if (present == 0) {
      // nothing to decide
    } else if (config.policy == PolicyKind::Uncoordinated) {
      for (std::size_t k = 0; k < present; ++k) slot.p_kw[k] = states[k].bounds.p_hi_kw;
    } else if (config.policy == PolicyKind::Droop) {
      // Each vehicle reacts to the voltage its meter showed during the
      // previous slot; before anything has flowed, to the no-vehicle state.
      slot.p_kw = run_slot_droop(states, model, have_prev ? prev_true : op_sol, config.droop);
    } else {
      const Eigen::MatrixXd jacobian = compute_jacobian(model, op_sol);
      const SensitivityMatrix sens =
          extract_sensitivity(model, jacobian, op_sol, pilots, slot.nodes);
      const ObjectiveContext ctx = make_objective_context(
          model, sens, config.band, config.metric, config.v_ref, config.neighborhoods);
      BrdResult brd_result = run_slot_brd(states, ctx, brd_policy);
      slot.p_kw = std::move(brd_result.profile_kw);
      slot.trace = std::move(brd_result.trace);
      slot.cause = brd_result.cause;
      slot.rounds = brd_result.rounds;
      slot.turns = brd_result.turns;
      slot.applied_updates = brd_result.applied_updates;
      if (slot.cause == TerminationCause::CycleDetected) ++result.summary.cycle_slots;
      if (slot.cause == TerminationCause::RoundCap) ++result.summary.round_cap_slots;
    }

    if (present == 0) {
      slot.solution = op_sol;  // same injections, no second solve needed
    } else {
      std::vector<double> true_p = base_p;
      for (std::size_t k = 0; k < present; ++k)
        true_p[model.index_of(slot.nodes[k])] -= slot.p_kw[k];
      slot.solution = solve_load_flow(model, true_p, base_q, config.flow, &op_sol);
      slot.flow_iterations += slot.solution.iterations;
    }

    slot.v_min_pu = slot.solution.v_mag[0];
    slot.v_min_node = model.id_of(0);
    for (int i = 0; i < n; ++i) {
      const double v = slot.solution.v_mag[i];
      result.summary.min_v_per_node_pu[i] = std::min(result.summary.min_v_per_node_pu[i], v);
      if (v < slot.v_min_pu) {
        slot.v_min_pu = v;
        slot.v_min_node = model.id_of(i);
      }
      if (i != model.slack_index()) {
        result.summary.total_penalty_quadratic +=
            penalty(v, config.band, PenaltyKind::Quadratic);
        result.summary.total_penalty_crenel += penalty(v, config.band, PenaltyKind::Crenel);
      }
    }
    if (slot.v_min_pu < result.summary.min_v_pu) {
      result.summary.min_v_pu = slot.v_min_pu;
      result.summary.min_v_node = slot.v_min_node;
      result.summary.min_v_slot = t;
    }
    result.summary.min_v_report_node_pu =
        std::min(result.summary.min_v_report_node_pu, slot.solution.v_mag[report_index]);

    for (std::size_t k = 0; k < present; ++k) {
      const Vehicle& veh = fleet[slot.vehicle_ids[k]];
      result.final_soc[veh.id] =
          step_soc(veh, result.final_soc[veh.id], slot.bounds[k], slot.p_kw[k], dt);
      result.summary.energy_delivered_kwh += slot.p_kw[k] * dt;
      prev_applied_kw[veh.id] = slot.p_kw[k];
    }
    result.summary.total_turns += slot.turns;
    result.summary.total_applied_updates += slot.applied_updates;
    result.summary.total_flow_iterations += slot.flow_iterations;

    prev_true = slot.solution;
    have_prev = true;
    result.slots.push_back(std::move(slot));
  }

  for (const Vehicle& veh : fleet)
    if (result.final_soc[veh.id].soc_kwh < veh.soc_min_kwh - 1e-9)
      ++result.summary.soc_violations;
  return result;
}

MonteCarloReport run_monte_carlo(const FeederModel& model, const MonteCarloConfig& config) {
  if (config.fleet_sizes.empty()) throw ConfigError("monte carlo: no fleet sizes given");
  for (const int size : config.fleet_sizes)
    if (size < 0) throw ConfigError("monte carlo: negative fleet size");
  if (config.draws < 1) throw ConfigError("monte carlo: draws must be at least 1");
  if (config.policies.empty()) throw ConfigError("monte carlo: no policies given");

  MonteCarloReport report;
  report.fleet_sizes = config.fleet_sizes;
  report.policies = config.policies;

  const std::size_t n_sizes = config.fleet_sizes.size();
  const std::size_t n_policies = config.policies.size();
  const std::size_t n_cells = n_sizes * static_cast<std::size_t>(config.draws);
  report.cells.assign(n_cells, MonteCarloCell{});
  std::vector<std::exception_ptr> failures(n_cells);

  const std::vector<int> candidates = model.load_bus_ids();
  const bool parallel = config.mode == ExecutionMode::OpenMP;
  (void)parallel;

  // Cells are independent and each derives its own seed, so the schedule
  // cannot change any result, only the wall time.
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
  for (long long idx = 0; idx < static_cast<long long>(n_cells); ++idx) {
    try {
      const std::size_t size_index = static_cast<std::size_t>(idx) / config.draws;
      const int draw = static_cast<int>(static_cast<std::size_t>(idx) % config.draws);
      MonteCarloCell cell;
      cell.fleet_size = config.fleet_sizes[size_index];
      cell.draw = draw;
      cell.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(size_index),
                              static_cast<std::uint64_t>(draw));

      FleetSpec spec = config.fleet;
      spec.n_vehicles = cell.fleet_size;
      const FleetSample sample =
          sample_fleet(spec, config.scenario.horizon, candidates, cell.seed);

      cell.min_v_report_pu.reserve(n_policies);
      for (const PolicyKind policy : config.policies) {
        ScenarioConfig scenario = config.scenario;
        scenario.policy = policy;
        const ScenarioResult run = run_scenario(model, sample.vehicles, scenario);
        cell.min_v_report_pu.push_back(run.summary.min_v_report_node_pu);
      }
      report.cells[idx] = std::move(cell);
    } catch (...) {
      failures[idx] = std::current_exception();
    }
  }
  for (const std::exception_ptr& failure : failures)
    if (failure) std::rethrow_exception(failure);

  report.mean_min_v.assign(n_sizes, std::vector<double>(n_policies, 0.0));
  report.std_min_v.assign(n_sizes, std::vector<double>(n_policies, 0.0));
  for (std::size_t s = 0; s < n_sizes; ++s)
    for (std::size_t p = 0; p < n_policies; ++p) {
      double sum = 0.0;
      for (int d = 0; d < config.draws; ++d)
        sum += report.cells[s * config.draws + d].min_v_report_pu[p];
      const double mean = sum / config.draws;
      double sq = 0.0;
      for (int d = 0; d < config.draws; ++d) {
        const double x = report.cells[s * config.draws + d].min_v_report_pu[p] - mean;
        sq += x * x;
      }
      report.mean_min_v[s][p] = mean;
      report.std_min_v[s][p] = std::sqrt(sq / config.draws);
    }
  return report;
}

}  // namespace evcoord
