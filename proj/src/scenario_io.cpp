#include "evcoord/scenario_io.hpp"

#include <cstddef>
#include <sstream>
#include <string>

#include "evcoord/errors.hpp"
#include "evcoord/table.hpp"

namespace evcoord {
namespace {

void append_row_end(std::ostringstream& out) { out << '\n'; }

}  // namespace

std::string serialize_slot_results(const ScenarioResult& result) {
  std::ostringstream out;
  out << "slot,n_vehicles,p_total_kw,v_min_pu,v_min_node,cause,rounds,turns,"
         "applied_updates,flow_iterations\n";
  for (const SlotResult& slot : result.slots) {
    double p_total = 0.0;
    for (const double p : slot.p_kw) p_total += p;
    out << slot.slot << ',' << slot.vehicle_ids.size() << ',' << fmt_double(p_total) << ','
        << fmt_double(slot.v_min_pu) << ',' << slot.v_min_node << ','
        << to_string(slot.cause) << ',' << slot.rounds << ',' << slot.turns << ','
        << slot.applied_updates << ',' << slot.flow_iterations;
    append_row_end(out);
  }
  return out.str();
}

std::string serialize_voltage_profile(const FeederModel& model,
                                      const std::vector<std::string>& labels,
                                      const std::vector<const ScenarioResult*>& runs) {
  if (labels.size() != runs.size())
    throw ContractError("voltage profile: one label per run required");
  std::ostringstream out;
  out << "node";
  for (const std::string& label : labels) out << ",v_min_" << label << "_pu";
  append_row_end(out);
  for (int i = 0; i < model.n(); ++i) {
    out << model.id_of(i);
    for (const ScenarioResult* run : runs) {
      if (static_cast<std::size_t>(model.n()) != run->summary.min_v_per_node_pu.size())
        throw ContractError("voltage profile: run does not match the feeder");
      out << ',' << fmt_double(run->summary.min_v_per_node_pu[i]);
    }
    append_row_end(out);
  }
  return out.str();
}

std::string serialize_traces(const ScenarioResult& result, const std::vector<Vehicle>& fleet) {
  std::ostringstream out;
  out << "slot,entry,updater";
  for (const Vehicle& veh : fleet) out << ",p_" << veh.id << "_kw";
  out << ",objective\n";
  std::vector<double> p_by_id(fleet.size(), 0.0);
  for (const SlotResult& slot : result.slots) {
    for (std::size_t e = 0; e < slot.trace.size(); ++e) {
      const TraceEntry& entry = slot.trace[e];
      out << slot.slot << ',' << e << ',' << entry.updater;
      // The trace stores only the plugged-in vehicles; report absent ones
      // as zero so the column set stays fixed over the horizon.
      p_by_id.assign(fleet.size(), 0.0);
      for (std::size_t k = 0; k < slot.vehicle_ids.size(); ++k)
        p_by_id[slot.vehicle_ids[k]] = entry.p_kw[k];
      for (const Vehicle& veh : fleet) out << ',' << fmt_double(p_by_id[veh.id]);
      out << ',' << fmt_double(entry.potential);
      append_row_end(out);
    }
  }
  return out.str();
}

std::string serialize_vehicle_summary(const std::vector<Vehicle>& fleet,
                                      const ScenarioResult& result) {
  if (fleet.size() != result.final_soc.size())
    throw ContractError("vehicle summary: result does not match the fleet");
  std::ostringstream out;
  out << "id,node,soc_init_kwh,soc_min_kwh,soc_max_kwh,p_max_kw,arrival_slot,"
         "departure_slot,soc_final_kwh,energy_kwh\n";
  for (const Vehicle& veh : fleet) {
    const SocState& final_soc = result.final_soc[veh.id];
    out << veh.id << ',' << veh.node << ',' << fmt_double(veh.soc_init_kwh) << ','
        << fmt_double(veh.soc_min_kwh) << ',' << fmt_double(veh.soc_max_kwh) << ','
        << fmt_double(veh.p_max_kw) << ',' << veh.arrival_slot << ','
        << veh.departure_slot << ',' << fmt_double(final_soc.soc_kwh) << ','
        << fmt_double(final_soc.soc_kwh - veh.soc_init_kwh);
    append_row_end(out);
  }
  return out.str();
}

std::string serialize_run_summary(const RunSummary& summary) {
  std::ostringstream out;
  out << "min_v_pu,min_v_node,min_v_slot,report_node,min_v_report_node_pu,"
         "total_penalty_quadratic,total_penalty_crenel,energy_delivered_kwh,"
         "soc_violations,total_turns,total_applied_updates,total_flow_iterations,"
         "cycle_slots,round_cap_slots\n";
  out << fmt_double(summary.min_v_pu) << ',' << summary.min_v_node << ','
      << summary.min_v_slot << ',' << summary.report_node << ','
      << fmt_double(summary.min_v_report_node_pu) << ','
      << fmt_double(summary.total_penalty_quadratic) << ','
      << fmt_double(summary.total_penalty_crenel) << ','
      << fmt_double(summary.energy_delivered_kwh) << ',' << summary.soc_violations << ','
      << summary.total_turns << ',' << summary.total_applied_updates << ','
      << summary.total_flow_iterations << ',' << summary.cycle_slots << ','
      << summary.round_cap_slots;
  append_row_end(out);
  return out.str();
}

std::string serialize_monte_carlo_draws(const MonteCarloReport& report) {
  std::ostringstream out;
  out << "fleet_size,draw,seed";
  for (const PolicyKind policy : report.policies) out << ",min_v_" << to_string(policy) << "_pu";
  append_row_end(out);
  for (const MonteCarloCell& cell : report.cells) {
    out << cell.fleet_size << ',' << cell.draw << ',' << cell.seed;
    for (const double v : cell.min_v_report_pu) out << ',' << fmt_double(v);
    append_row_end(out);
  }
  return out.str();
}

std::string serialize_monte_carlo_report(const MonteCarloReport& report) {
  std::ostringstream out;
  out << "fleet_size,policy,mean_min_v_pu,std_min_v_pu\n";
  for (std::size_t s = 0; s < report.fleet_sizes.size(); ++s)
    for (std::size_t p = 0; p < report.policies.size(); ++p) {
      out << report.fleet_sizes[s] << ',' << to_string(report.policies[p]) << ','
          << fmt_double(report.mean_min_v[s][p]) << ',' << fmt_double(report.std_min_v[s][p]);
      append_row_end(out);
    }
  return out.str();
}

std::string serialize_solution(const FeederModel& model, const LoadFlowSolution& solution) {
  std::ostringstream out;
  out << "node,v_pu,v_angle_rad\n";
  for (int i = 0; i < model.n(); ++i) {
    out << model.id_of(i) << ',' << fmt_double(solution.v_mag[i]) << ','
        << fmt_double(solution.v_ang[i]);
    append_row_end(out);
  }
  return out.str();
}

std::string serialize_sensitivity(const SensitivityMatrix& sensitivity) {
  std::ostringstream out;
  out << "pilot_node,control_node,dv_dp\n";
  for (std::size_t p = 0; p < sensitivity.pilot_nodes.size(); ++p)
    for (std::size_t c = 0; c < sensitivity.control_nodes.size(); ++c) {
      out << sensitivity.pilot_nodes[p] << ',' << sensitivity.control_nodes[c] << ','
          << fmt_double(sensitivity.dv_dp(static_cast<int>(p), static_cast<int>(c)));
      append_row_end(out);
    }
  return out.str();
}

std::string serialize_calibration(const CalibrationResult& result) {
  std::ostringstream out;
  out << "section_ohm,min_v_pu,min_v_no_ev_pu,evaluations\n";
  out << fmt_double(result.section_ohm) << ',' << fmt_double(result.min_v_pu) << ','
      << fmt_double(result.min_v_no_ev_pu) << ',' << result.evaluations;
  append_row_end(out);
  return out.str();
}

}  // namespace evcoord
