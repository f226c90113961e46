#pragma once

#include <vector>

#include "evcoord/coordination.hpp"
#include "evcoord/feeder.hpp"
#include "evcoord/fleet.hpp"
#include "evcoord/loadflow.hpp"

namespace evcoord {

// Local voltage-droop characteristic: no charging at or below v_zero, full
// p_ceiling at or above v_full, linear in between.
struct DroopCurve {
  double v_zero = 0.90;
  double v_full = 0.95;
  double p_ceiling_kw = 3.3;
};

// Curve value alone, before any battery constraint.
double droop_raw(double v_pu, const DroopCurve& curve);

// Curve value clamped into the slot's feasible interval; the deadline floor
// wins over the curve when they disagree.
double droop_power(double v_pu, const DroopCurve& curve, const PowerBounds& bounds);

// Greedy charging: the highest feasible power this slot.
double uncoordinated_power(const Vehicle& vehicle, const SocState& state, int slot,
                           double slot_hours);

// One droop step for every plugged-in vehicle, reading each vehicle's local
// voltage from the previous slot's solved state. No iteration within the
// slot: the measurement lags the decision by one slot.
std::vector<double> run_slot_droop(const std::vector<SlotVehicleState>& vehicles,
                                   const FeederModel& model,
                                   const LoadFlowSolution& previous_solution,
                                   const DroopCurve& curve);

}  // namespace evcoord
