#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evcoord/horizon.hpp"
#include "evcoord/rng.hpp"

namespace evcoord {

struct Vehicle {
  int id = 0;
  int node = 0;  // bus id where the vehicle plugs in
  double soc_init_kwh = 0.0;
  double soc_min_kwh = 0.0;  // must be reached by departure
  double soc_max_kwh = 0.0;
  double p_max_kw = 3.3;
  int arrival_slot = 0;
  int departure_slot = 0;  // exclusive: charging allowed on [arrival, departure)
};

struct SocState {
  int vehicle_id = 0;
  double soc_kwh = 0.0;
  int slot = 0;
};

struct PowerBounds {
  double p_lo_kw = 0.0;  // minimum to keep the departure target reachable
  double p_hi_kw = 0.0;  // battery headroom and charger rating
};

// Energy to recover a trip of the given distance, assuming consumption
// proportional to the full-range budget.
double energy_need_from_distance(double distance_km, double battery_kwh = 24.0,
                                 double range_km = 150.0);

// Feasible charging power for the vehicle's current slot. p_lo rises as the
// departure deadline approaches; p_hi caps at the battery headroom. Throws
// InfeasibilityError naming the vehicle when no power in [0, p_max] keeps
// the target reachable; throws ContractError outside the plug-in window.
PowerBounds power_bounds(const Vehicle& vehicle, const SocState& state, int slot,
                         double slot_hours);

// Advances the battery one slot at charging power p_kw (unit efficiency).
// p_kw must lie inside the bounds computed for this slot.
SocState step_soc(const Vehicle& vehicle, const SocState& state, const PowerBounds& bounds,
                  double p_kw, double slot_hours);

struct FleetSpec {
  int n_vehicles = 30;
  double battery_kwh = 24.0;
  double range_km = 150.0;
  double need_km_mean = 30.0;
  double need_km_std = 3.0;
  // Minutes since midnight of day 0; departures land on day 1.
  double arrival_mean_min = 18 * 60 + 45;
  double arrival_std_min = 60.0;
  double departure_mean_min = 8 * 60 + 24 * 60;
  double departure_std_min = 45.0;
  double p_max_kw = 3.3;
  // When set, vehicle i plugs in at placement_nodes[i]; otherwise placements
  // are drawn uniformly without replacement from the candidate buses.
  std::optional<std::vector<int>> placement_nodes;
};

struct FleetSample {
  std::vector<Vehicle> vehicles;
  std::vector<std::string> warnings;  // horizon truncations
};

// One trip-distance draw (km), rejection-sampled into [0, range].
double sample_need_km(Rng& rng, const FleetSpec& spec);

// Samples a fleet: per-vehicle need and plug-in window first (rejecting
// draws whose window cannot fit the need), then placements. Deterministic
// for a given seed. candidate_nodes are the buses eligible for placement;
// at most one vehicle lands on each.
FleetSample sample_fleet(const FleetSpec& spec, const Horizon& horizon,
                         const std::vector<int>& candidate_nodes, std::uint64_t seed);

// Fleet file format: one CSV row per vehicle,
// id,node,soc_init_kwh,soc_min_kwh,soc_max_kwh,p_max_kw,arrival_slot,departure_slot
std::vector<Vehicle> parse_fleet(const std::string& text, const std::string& origin);
std::vector<Vehicle> load_fleet_file(const std::string& path);
std::string serialize_fleet(const std::vector<Vehicle>& fleet);
void write_fleet_file(const std::vector<Vehicle>& fleet, const std::string& path);

// Shared validity rules for sampled and file-loaded fleets: ids unique and
// dense from 0, nodes distinct, SoC ordering, positive rating, non-empty
// window inside the horizon.
void validate_fleet(const std::vector<Vehicle>& fleet, int n_slots);

}  // namespace evcoord
