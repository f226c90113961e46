#include "evcoord/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "evcoord/errors.hpp"
#include "evcoord/table.hpp"

namespace evcoord {

double energy_need_from_distance(double distance_km, double battery_kwh, double range_km) {
  if (distance_km < 0.0) throw ContractError("energy_need_from_distance: negative distance");
  if (battery_kwh <= 0.0 || range_km <= 0.0)
    throw ContractError("energy_need_from_distance: battery and range must be positive");
  return distance_km * battery_kwh / range_km;
}

PowerBounds power_bounds(const Vehicle& vehicle, const SocState& state, int slot,
                         double slot_hours) {
  if (slot < vehicle.arrival_slot || slot >= vehicle.departure_slot)
    throw ContractError("power_bounds: vehicle " + std::to_string(vehicle.id) +
                        " is not plugged in at slot " + std::to_string(slot));
  if (slot_hours <= 0.0) throw ContractError("power_bounds: slot_hours must be positive");

  const int slots_left = vehicle.departure_slot - slot;  // including this one
  const double deficit_kwh = vehicle.soc_min_kwh - state.soc_kwh;
  const double max_recoverable = vehicle.p_max_kw * slots_left * slot_hours;
  if (deficit_kwh > max_recoverable + 1e-9)
    throw InfeasibilityError(
        "vehicle " + std::to_string(vehicle.id) + ": needs " + fmt_double(deficit_kwh) +
            " kWh but can recover at most " + fmt_double(max_recoverable) + " kWh before slot " +
            std::to_string(vehicle.departure_slot),
        vehicle.id);

  PowerBounds bounds;
  const double headroom_rate = (vehicle.soc_max_kwh - state.soc_kwh) / slot_hours;
  bounds.p_hi_kw = std::clamp(std::min(vehicle.p_max_kw, headroom_rate), 0.0, vehicle.p_max_kw);
  const double must_now = deficit_kwh / slot_hours - vehicle.p_max_kw * (slots_left - 1);
  bounds.p_lo_kw = std::clamp(must_now, 0.0, vehicle.p_max_kw);
  if (bounds.p_lo_kw > bounds.p_hi_kw) {
    // soc_min <= soc_max makes the floor exceed the headroom cap only by
    // floating-point slop; anything larger is a real infeasibility.
    if (bounds.p_lo_kw - bounds.p_hi_kw > 1e-9)
      throw InfeasibilityError("vehicle " + std::to_string(vehicle.id) +
                                   ": required power exceeds battery headroom",
                               vehicle.id);
    bounds.p_lo_kw = bounds.p_hi_kw;
  }
  return bounds;
}

SocState step_soc(const Vehicle& vehicle, const SocState& state, const PowerBounds& bounds,
                  double p_kw, double slot_hours) {
  if (p_kw < bounds.p_lo_kw - 1e-9 || p_kw > bounds.p_hi_kw + 1e-9)
    throw ContractError("step_soc: power " + fmt_double(p_kw) + " outside bounds [" +
                        fmt_double(bounds.p_lo_kw) + ", " + fmt_double(bounds.p_hi_kw) +
                        "] for vehicle " + std::to_string(vehicle.id));
  SocState next;
  next.vehicle_id = state.vehicle_id;
  next.slot = state.slot + 1;
  next.soc_kwh = std::min(state.soc_kwh + p_kw * slot_hours, vehicle.soc_max_kwh);
  return next;
}

double sample_need_km(Rng& rng, const FleetSpec& spec) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double need = rng.normal(spec.need_km_mean, spec.need_km_std);
    if (need >= 0.0 && need <= spec.range_km) return need;
  }
  throw ConfigError("fleet spec: need distribution never lands in [0, range]");
}

FleetSample sample_fleet(const FleetSpec& spec, const Horizon& horizon,
                         const std::vector<int>& candidate_nodes, std::uint64_t seed) {
  horizon.validate();
  if (spec.n_vehicles < 0) throw ConfigError("fleet spec: negative vehicle count");
  if (spec.p_max_kw <= 0.0) throw ConfigError("fleet spec: p_max must be positive");
  if (spec.battery_kwh <= 0.0 || spec.range_km <= 0.0)
    throw ConfigError("fleet spec: battery and range must be positive");

  Rng rng(seed);
  FleetSample out;
  const int n_slots = horizon.n_slots();
  const double dt = horizon.slot_hours();

  for (int i = 0; i < spec.n_vehicles; ++i) {
    Vehicle vehicle;
    vehicle.id = i;
    vehicle.soc_max_kwh = spec.battery_kwh;
    vehicle.p_max_kw = spec.p_max_kw;

    bool accepted = false;
    for (int attempt = 0; attempt < 10000 && !accepted; ++attempt) {
      const double need_km = sample_need_km(rng, spec);
      const double arrival_min = rng.normal(spec.arrival_mean_min, spec.arrival_std_min);
      const double departure_min = rng.normal(spec.departure_mean_min, spec.departure_std_min);
      if (departure_min <= arrival_min) continue;

      int arrival_slot = horizon.arrival_slot(arrival_min);
      int departure_slot = horizon.departure_slot(departure_min);
      const bool arrival_truncated = arrival_slot < 0;
      const bool departure_truncated = departure_slot > n_slots;
      arrival_slot = std::max(arrival_slot, 0);
      departure_slot = std::min(departure_slot, n_slots);
      if (arrival_slot >= n_slots || departure_slot <= 0) continue;
      if (departure_slot <= arrival_slot) continue;

      const double need_kwh =
          energy_need_from_distance(need_km, spec.battery_kwh, spec.range_km);
      const int window = departure_slot - arrival_slot;
      if (need_kwh > spec.p_max_kw * window * dt + 1e-9) continue;

      vehicle.arrival_slot = arrival_slot;
      vehicle.departure_slot = departure_slot;
      vehicle.soc_init_kwh = spec.battery_kwh - need_kwh;
      vehicle.soc_min_kwh = spec.battery_kwh;
      if (arrival_truncated)
        out.warnings.push_back("vehicle " + std::to_string(i) + ": arrival " +
                               format_clock(static_cast<int>(arrival_min)) +
                               " precedes the horizon, truncated to slot 0");
      if (departure_truncated)
        out.warnings.push_back("vehicle " + std::to_string(i) + ": departure " +
                               format_clock(static_cast<int>(departure_min)) +
                               " exceeds the horizon, truncated to slot " +
                               std::to_string(n_slots));
      accepted = true;
    }
    if (!accepted)
      throw ConfigError("fleet spec: could not sample a feasible window for vehicle " +
                        std::to_string(i));
    out.vehicles.push_back(vehicle);
  }

  if (spec.placement_nodes.has_value()) {
    if (static_cast<int>(spec.placement_nodes->size()) != spec.n_vehicles)
      throw ConfigError("fleet spec: placement list size does not match n_vehicles");
    for (int i = 0; i < spec.n_vehicles; ++i)
      out.vehicles[i].node = (*spec.placement_nodes)[i];
  } else {
    if (spec.n_vehicles > static_cast<int>(candidate_nodes.size()))
      throw ConfigError("fleet spec: " + std::to_string(spec.n_vehicles) +
                        " vehicles but only " + std::to_string(candidate_nodes.size()) +
                        " candidate buses (one vehicle per bus)");
    // Partial Fisher-Yates over a copy of the candidate list.
    std::vector<int> pool = candidate_nodes;
    for (int i = 0; i < spec.n_vehicles; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      out.vehicles[i].node = pool[i];
    }
  }

  validate_fleet(out.vehicles, n_slots);
  return out;
}

void validate_fleet(const std::vector<Vehicle>& fleet, int n_slots) {
  std::set<int> nodes;
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const Vehicle& vehicle = fleet[i];
    if (vehicle.id != static_cast<int>(i))
      throw ConfigError("fleet: vehicle ids must be 0.." + std::to_string(fleet.size() - 1) +
                        " in order, got " + std::to_string(vehicle.id));
    if (!nodes.insert(vehicle.node).second)
      throw ConfigError("fleet: two vehicles plug in at bus " + std::to_string(vehicle.node));
    if (vehicle.soc_min_kwh > vehicle.soc_max_kwh + 1e-12 ||
        vehicle.soc_init_kwh < -1e-12 || vehicle.soc_init_kwh > vehicle.soc_max_kwh + 1e-12)
      throw ConfigError("fleet: vehicle " + std::to_string(vehicle.id) +
                        " has inconsistent battery levels");
    if (vehicle.p_max_kw <= 0.0)
      throw ConfigError("fleet: vehicle " + std::to_string(vehicle.id) +
                        " has non-positive charger rating");
    if (vehicle.arrival_slot < 0 || vehicle.departure_slot > n_slots ||
        vehicle.departure_slot <= vehicle.arrival_slot)
      throw ConfigError("fleet: vehicle " + std::to_string(vehicle.id) +
                        " has an empty or out-of-horizon window");
  }
}

std::vector<Vehicle> parse_fleet(const std::string& text, const std::string& origin) {
  std::vector<Vehicle> fleet;
  for (const NumberedLine& line : significant_lines(text)) {
    const std::vector<std::string> fields = split_csv(line.text);
    if (fields.size() != 8)
      throw ConfigError(origin + ":" + std::to_string(line.number) +
                        ": fleet rows are id,node,soc_init_kwh,soc_min_kwh,soc_max_kwh,"
                        "p_max_kw,arrival_slot,departure_slot");
    Vehicle vehicle;
    vehicle.id = parse_int_field(fields[0], origin, line.number);
    vehicle.node = parse_int_field(fields[1], origin, line.number);
    vehicle.soc_init_kwh = parse_double_field(fields[2], origin, line.number);
    vehicle.soc_min_kwh = parse_double_field(fields[3], origin, line.number);
    vehicle.soc_max_kwh = parse_double_field(fields[4], origin, line.number);
    vehicle.p_max_kw = parse_double_field(fields[5], origin, line.number);
    vehicle.arrival_slot = parse_int_field(fields[6], origin, line.number);
    vehicle.departure_slot = parse_int_field(fields[7], origin, line.number);
    fleet.push_back(vehicle);
  }
  return fleet;
}

std::vector<Vehicle> load_fleet_file(const std::string& path) {
  return parse_fleet(read_text_file(path), path);
}

std::string serialize_fleet(const std::vector<Vehicle>& fleet) {
  std::ostringstream out;
  out << "# id,node,soc_init_kwh,soc_min_kwh,soc_max_kwh,p_max_kw,arrival_slot,departure_slot\n";
  for (const Vehicle& vehicle : fleet)
    out << vehicle.id << "," << vehicle.node << "," << fmt_double(vehicle.soc_init_kwh) << ","
        << fmt_double(vehicle.soc_min_kwh) << "," << fmt_double(vehicle.soc_max_kwh) << ","
        << fmt_double(vehicle.p_max_kw) << "," << vehicle.arrival_slot << ","
        << vehicle.departure_slot << "\n";
  return out.str();
}

void write_fleet_file(const std::vector<Vehicle>& fleet, const std::string& path) {
  write_text_file(path, serialize_fleet(fleet));
}

}  // namespace evcoord
