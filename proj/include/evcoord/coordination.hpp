#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evcoord/fleet.hpp"
#include "evcoord/metrics.hpp"

namespace evcoord {

enum class UpdateSchedule { Asynchronous, Synchronous };
enum class ObjectiveScope { Global, Local };
enum class UpdateOrder { FixedAscending, SeededPermutation };

struct PolicyConfig {
  UpdateSchedule schedule = UpdateSchedule::Asynchronous;
  ObjectiveScope scope = ObjectiveScope::Global;
  int max_rounds = 100;  // full passes over the fleet
  int br_grid = 331;     // candidate count for the crenel line search
  UpdateOrder order = UpdateOrder::FixedAscending;
  std::uint64_t order_seed = 0;
};

// A vehicle's view of one coordination slot. Column i of the objective
// context belongs to vehicles[i]; p_operating_kw is the charging power
// already present in the measured operating point (its previous-slot value).
struct SlotVehicleState {
  int vehicle_id = 0;
  int node = 0;
  PowerBounds bounds;
  double p_operating_kw = 0.0;
};

inline constexpr int kUpdaterInit = -1;  // snapshot before any update
inline constexpr int kUpdaterAll = -2;   // synchronous round

struct TraceEntry {
  int iteration = 0;
  int updater = kUpdaterInit;      // vehicle id, or one of the sentinels
  std::vector<double> p_kw;        // full profile after this update
  double potential = 0.0;          // predicted global objective
  std::vector<double> v_predicted; // per pilot node
};
using IterationTrace = std::vector<TraceEntry>;

enum class TerminationCause { Converged, CycleDetected, RoundCap };
const char* to_string(TerminationCause cause);

struct BrdResult {
  std::vector<double> profile_kw;  // one entry per vehicle, bounds-feasible
  IterationTrace trace;
  TerminationCause cause = TerminationCause::Converged;
  int rounds = 0;           // full passes started
  int turns = 0;            // best-response evaluations
  int applied_updates = 0;  // moves that changed the profile
};

// Exact minimizer of the vehicle's predicted band cost over its feasible
// power interval, holding every other column of profile_kw fixed. Quadratic
// penalties are minimized in closed form piece by piece; the crenel penalty
// falls back to a br_grid-point line search. Ties break toward the highest
// charging power.
double best_response(const std::vector<SlotVehicleState>& vehicles, int column,
                     std::span<const double> profile_kw, const ObjectiveContext& ctx,
                     ObjectiveScope scope, int br_grid);

// Iterated best responses for one slot, starting from every vehicle at its
// maximum feasible power. Asynchronous rounds apply one vehicle at a time
// and only when its own objective drops by more than 1e-10; synchronous
// rounds move every vehicle to its best response against the same snapshot.
// A repeated profile stops the run as CycleDetected and the result carries
// the lowest-potential profile seen within the cycle.
BrdResult run_slot_brd(const std::vector<SlotVehicleState>& vehicles,
                       const ObjectiveContext& ctx, const PolicyConfig& policy);

// Earliest trace index whose profile equals the final entry's profile, both
// quantized at 1e-9 kW; nullopt when the final profile is unique.
std::optional<std::size_t> detect_cycle(const IterationTrace& trace);

}  // namespace evcoord
