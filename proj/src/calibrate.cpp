#include "evcoord/calibrate.hpp"

#include <cmath>
#include <utility>

#include "evcoord/errors.hpp"

namespace evcoord {

namespace {

// from-to pairs of the 34-bus layout; the trunk runs 1-7 and then continues
// 7-15-16-...-22 before fanning out, which puts bus 34 seventeen hops from
// the slack.
constexpr std::pair<int, int> kSurrogateLines[] = {
    {1, 2},   {2, 3},   {3, 4},   {4, 5},   {5, 6},   {6, 7},   {4, 8},   {8, 9},
    {9, 10},  {6, 11},  {11, 12}, {7, 13},  {13, 14}, {7, 15},  {15, 16}, {16, 17},
    {17, 18}, {18, 19}, {19, 20}, {20, 21}, {21, 22}, {16, 23}, {23, 24}, {18, 25},
    {25, 26}, {26, 27}, {20, 28}, {28, 29}, {22, 30}, {30, 31}, {22, 32}, {32, 33},
    {33, 34},
};

}  // namespace

FeederModel surrogate_feeder(double section_ohm, double load_p_kw, double load_q_kvar,
                             double base_voltage_v, double base_power_va) {
  if (section_ohm <= 0.0) throw ConfigError("surrogate feeder: section impedance must be positive");
  std::vector<Bus> buses;
  buses.reserve(34);
  for (int id = 1; id <= 34; ++id) {
    Bus bus;
    bus.id = id;
    bus.is_slack = (id == 1);
    if (!bus.is_slack) {
      bus.base_load_p_kw = load_p_kw;
      bus.base_load_q_kvar = load_q_kvar;
    }
    buses.push_back(bus);
  }
  std::vector<Line> lines;
  lines.reserve(std::size(kSurrogateLines));
  for (const auto& [from, to] : kSurrogateLines)
    lines.push_back(Line{from, to, section_ohm, section_ohm});
  return FeederModel(std::move(buses), std::move(lines), base_voltage_v, base_power_va);
}

namespace {

struct Probe {
  double min_v_fleet = 0.0;
  double min_v_no_ev = 0.0;
};

Probe probe_scale(double section_ohm, const CalibrationConfig& config) {
  const FeederModel model = surrogate_feeder(section_ohm);
  ScenarioConfig scenario = config.scenario;
  scenario.policy = PolicyKind::Uncoordinated;
  scenario.report_node = 0;  // deepest bus

  FleetSpec spec = config.fleet;
  spec.n_vehicles = config.n_vehicles;
  const FleetSample sample =
      sample_fleet(spec, scenario.horizon, model.load_bus_ids(), config.seed);

  // A feeder too weak to carry the load at all counts as sagging below any
  // target, so the bisection walks back toward the stiff end.
  const auto min_v_or_collapse = [&](const std::vector<Vehicle>& fleet) {
    try {
      return run_scenario(model, fleet, scenario).summary.min_v_report_node_pu;
    } catch (const NumericalError&) {
      return 0.0;
    }
  };
  Probe probe;
  probe.min_v_fleet = min_v_or_collapse(sample.vehicles);
  probe.min_v_no_ev = min_v_or_collapse({});
  return probe;
}

}  // namespace

CalibrationResult calibrate_surrogate(const CalibrationConfig& config) {
  if (config.target_min_v_pu <= 0.0 || config.target_min_v_pu >= 1.0)
    throw ConfigError("calibration: target voltage must lie in (0, 1)");
  if (config.tolerance_pu <= 0.0) throw ConfigError("calibration: tolerance must be positive");
  if (!(config.section_lo_ohm > 0.0) || config.section_lo_ohm >= config.section_hi_ohm)
    throw ConfigError("calibration: need 0 < lo < hi for the impedance bracket");

  CalibrationResult result;
  double lo = config.section_lo_ohm;  // stiff end: voltage above target
  double hi = config.section_hi_ohm;  // weak end: voltage below target

  const Probe at_lo = probe_scale(lo, config);
  const Probe at_hi = probe_scale(hi, config);
  result.evaluations = 2;
  if (at_lo.min_v_fleet < config.target_min_v_pu)
    throw ConfigError("calibration: even the stiff end of the bracket sags below target");
  if (at_hi.min_v_fleet > config.target_min_v_pu)
    throw ConfigError("calibration: even the weak end of the bracket stays above target");

  while (result.evaluations < config.max_evaluations) {
    const double mid = 0.5 * (lo + hi);
    const Probe at_mid = probe_scale(mid, config);
    ++result.evaluations;
    if (std::abs(at_mid.min_v_fleet - config.target_min_v_pu) <= config.tolerance_pu) {
      result.section_ohm = mid;
      result.min_v_pu = at_mid.min_v_fleet;
      result.min_v_no_ev_pu = at_mid.min_v_no_ev;
      return result;
    }
    if (at_mid.min_v_fleet > config.target_min_v_pu)
      lo = mid;  // still too stiff
    else
      hi = mid;
  }
  throw ConfigError("calibration: evaluation budget exhausted before reaching the target");
}

}  // namespace evcoord
