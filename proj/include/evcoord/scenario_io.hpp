#pragma once

#include <string>
#include <vector>

#include "evcoord/calibrate.hpp"
#include "evcoord/feeder.hpp"
#include "evcoord/fleet.hpp"
#include "evcoord/loadflow.hpp"
#include "evcoord/scenario.hpp"
#include "evcoord/sensitivity.hpp"

namespace evcoord {

// Plot-ready tabular output. Column order is fixed and numbers use the
// 17-digit round-trip form, so files diff cleanly between runs. Nothing
// here depends on the clock or the environment.

// slot,n_vehicles,p_total_kw,v_min_pu,v_min_node,cause,rounds,turns,
// applied_updates,flow_iterations
std::string serialize_slot_results(const ScenarioResult& result);

// node,v_min_pu[,v_min_<policy>_pu...]: horizon minimum per bus. One column
// per label, matching `runs` order.
std::string serialize_voltage_profile(const FeederModel& model,
                                      const std::vector<std::string>& labels,
                                      const std::vector<const ScenarioResult*>& runs);

// slot,entry,updater,p_<vehicle>...,objective: the best-response path of
// every coordinated slot, columns fixed to the full fleet.
std::string serialize_traces(const ScenarioResult& result, const std::vector<Vehicle>& fleet);

// id,node,soc_init_kwh,soc_min_kwh,soc_max_kwh,p_max_kw,arrival_slot,
// departure_slot,soc_final_kwh,energy_kwh
std::string serialize_vehicle_summary(const std::vector<Vehicle>& fleet,
                                      const ScenarioResult& result);

// Single-row run totals.
std::string serialize_run_summary(const RunSummary& summary);

// fleet_size,draw,seed,min_v_<policy>_pu...
std::string serialize_monte_carlo_draws(const MonteCarloReport& report);

// fleet_size,policy,mean_min_v_pu,std_min_v_pu
std::string serialize_monte_carlo_report(const MonteCarloReport& report);

// node,v_pu,v_angle_rad for one solved state.
std::string serialize_solution(const FeederModel& model, const LoadFlowSolution& solution);

// pilot_node,control_node,dv_dp: per-unit voltage per per-unit power
std::string serialize_sensitivity(const SensitivityMatrix& sensitivity);

// Single-row calibration outcome.
std::string serialize_calibration(const CalibrationResult& result);

}  // namespace evcoord
