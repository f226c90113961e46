#include "evcoord/baselines.hpp"

#include <algorithm>

#include "evcoord/errors.hpp"

namespace evcoord {

double droop_raw(double v_pu, const DroopCurve& curve) {
  if (curve.v_zero >= curve.v_full) throw ContractError("droop curve: v_zero must be below v_full");
  if (v_pu <= curve.v_zero) return 0.0;
  if (v_pu >= curve.v_full) return curve.p_ceiling_kw;
  return curve.p_ceiling_kw * (v_pu - curve.v_zero) / (curve.v_full - curve.v_zero);
}

double droop_power(double v_pu, const DroopCurve& curve, const PowerBounds& bounds) {
  return std::clamp(droop_raw(v_pu, curve), bounds.p_lo_kw, bounds.p_hi_kw);
}

double uncoordinated_power(const Vehicle& vehicle, const SocState& state, int slot,
                           double slot_hours) {
  return power_bounds(vehicle, state, slot, slot_hours).p_hi_kw;
}

std::vector<double> run_slot_droop(const std::vector<SlotVehicleState>& vehicles,
                                   const FeederModel& model,
                                   const LoadFlowSolution& previous_solution,
                                   const DroopCurve& curve) {
  std::vector<double> profile;
  profile.reserve(vehicles.size());
  for (const SlotVehicleState& veh : vehicles) {
    const double v_local = previous_solution.v_mag[model.index_of(veh.node)];
    profile.push_back(droop_power(v_local, curve, veh.bounds));
  }
  return profile;
}

}  // namespace evcoord
