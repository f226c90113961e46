#include "evcoord/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "evcoord/errors.hpp"
#include "evcoord/table.hpp"
#include "json.hpp"

namespace evcoord {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
  throw ConfigError(origin + ": " + message);
}

// Rejects keys outside the schema so a misspelled option cannot silently
// fall back to its default.
void check_keys(const json& obj, const std::string& origin, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known) fail(origin, "unknown key '" + item.key() + "' in " + where);
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require_object(const json& obj, const std::string& origin, const char* key) {
  const json* j = find(obj, key);
  if (!j || !j->is_object()) fail(origin, std::string("'") + key + "' must be an object");
  return *j;
}

double get_number(const json& obj, const std::string& origin, const std::string& where,
                  const char* key, double fallback) {
  const json* j = find(obj, key);
  if (!j) return fallback;
  if (!j->is_number()) fail(origin, where + "." + key + " must be a number");
  return j->get<double>();
}

int get_int(const json& obj, const std::string& origin, const std::string& where,
            const char* key, int fallback) {
  const json* j = find(obj, key);
  if (!j) return fallback;
  if (!j->is_number_integer()) fail(origin, where + "." + key + " must be an integer");
  return j->get<int>();
}

bool get_bool(const json& obj, const std::string& origin, const std::string& where,
              const char* key, bool fallback) {
  const json* j = find(obj, key);
  if (!j) return fallback;
  if (!j->is_boolean()) fail(origin, where + "." + key + " must be true or false");
  return j->get<bool>();
}

std::string get_string(const json& obj, const std::string& origin, const std::string& where,
                       const char* key, const std::string& fallback) {
  const json* j = find(obj, key);
  if (!j) return fallback;
  if (!j->is_string()) fail(origin, where + "." + key + " must be a string");
  return j->get<std::string>();
}

std::uint64_t get_seed(const json& obj, const std::string& origin, const std::string& where,
                       const char* key, std::uint64_t fallback) {
  const json* j = find(obj, key);
  if (!j) return fallback;
  if (!j->is_number_integer() || (j->is_number_integer() && !j->is_number_unsigned() &&
                                  j->get<std::int64_t>() < 0))
    fail(origin, where + "." + key + " must be a non-negative integer");
  return j->get<std::uint64_t>();
}

// Clock values are either plain minutes since midnight of day 0 or an
// "HH:MM" string. Ends and means that land at or before their window start
// roll onto day 1, matching an overnight charging horizon.
double parse_minutes(const json& j, const std::string& origin, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) fail(origin, where + " must be minutes or an HH:MM string");
  return parse_clock_minutes(j.get<std::string>(), origin + ": " + where);
}

double get_minutes(const json& obj, const std::string& origin, const std::string& where,
                   const char* key, double fallback) {
  const json* j = find(obj, key);
  if (!j) return fallback;
  return parse_minutes(*j, origin, where + "." + key);
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

void parse_horizon(const json& obj, const std::string& origin, Horizon& horizon) {
  check_keys(obj, origin, "horizon", {"start", "end", "slot_minutes"});
  const double start = get_minutes(obj, origin, "horizon", "start", horizon.start_min);
  double end = get_minutes(obj, origin, "horizon", "end", horizon.end_min);
  if (start != std::floor(start) || end != std::floor(end))
    fail(origin, "horizon boundaries must be whole minutes");
  if (end <= start) end += 24 * 60;
  horizon.start_min = static_cast<int>(start);
  horizon.end_min = static_cast<int>(end);
  horizon.slot_minutes = get_int(obj, origin, "horizon", "slot_minutes", horizon.slot_minutes);
  horizon.validate();
}

void parse_fleet(const json& obj, const std::string& origin, const std::string& base_dir,
                 RunConfig& config) {
  if (const json* file = find(obj, "file")) {
    check_keys(obj, origin, "fleet", {"file"});
    if (!file->is_string()) fail(origin, "fleet.file must be a path string");
    config.fleet_file = resolve_path(base_dir, file->get<std::string>());
    return;
  }
  check_keys(obj, origin, "fleet",
             {"n_vehicles", "battery_kwh", "range_km", "need_km_mean", "need_km_std",
              "arrival_mean", "arrival_std_min", "departure_mean", "departure_std_min",
              "p_max_kw", "placement_nodes"});
  FleetSpec& fleet = config.fleet;
  fleet.n_vehicles = get_int(obj, origin, "fleet", "n_vehicles", fleet.n_vehicles);
  fleet.battery_kwh = get_number(obj, origin, "fleet", "battery_kwh", fleet.battery_kwh);
  fleet.range_km = get_number(obj, origin, "fleet", "range_km", fleet.range_km);
  fleet.need_km_mean = get_number(obj, origin, "fleet", "need_km_mean", fleet.need_km_mean);
  fleet.need_km_std = get_number(obj, origin, "fleet", "need_km_std", fleet.need_km_std);
  fleet.arrival_mean_min =
      get_minutes(obj, origin, "fleet", "arrival_mean", fleet.arrival_mean_min);
  fleet.arrival_std_min =
      get_number(obj, origin, "fleet", "arrival_std_min", fleet.arrival_std_min);
  fleet.departure_mean_min =
      get_minutes(obj, origin, "fleet", "departure_mean", fleet.departure_mean_min);
  fleet.departure_std_min =
      get_number(obj, origin, "fleet", "departure_std_min", fleet.departure_std_min);
  fleet.p_max_kw = get_number(obj, origin, "fleet", "p_max_kw", fleet.p_max_kw);
  // Departure means at or before the arrival mean belong to the next morning.
  if (fleet.departure_mean_min <= fleet.arrival_mean_min)
    fleet.departure_mean_min += 24 * 60;
  if (const json* nodes = find(obj, "placement_nodes")) {
    if (!nodes->is_array()) fail(origin, "fleet.placement_nodes must be a list of bus ids");
    std::vector<int> placements;
    for (const json& node : *nodes) {
      if (!node.is_number_integer())
        fail(origin, "fleet.placement_nodes entries must be bus ids");
      placements.push_back(node.get<int>());
    }
    fleet.placement_nodes = std::move(placements);
  }
}

void parse_policy(const json& obj, const std::string& origin, ScenarioConfig& scenario) {
  check_keys(obj, origin, "policy",
             {"name", "max_rounds", "br_grid", "update_order", "order_seed"});
  if (const json* name = find(obj, "name")) {
    if (!name->is_string()) fail(origin, "policy.name must be a string");
    scenario.policy = policy_from_string(name->get<std::string>());
  }
  scenario.brd.max_rounds =
      get_int(obj, origin, "policy", "max_rounds", scenario.brd.max_rounds);
  scenario.brd.br_grid = get_int(obj, origin, "policy", "br_grid", scenario.brd.br_grid);
  const std::string order = get_string(obj, origin, "policy", "update_order", "fixed");
  if (order == "fixed")
    scenario.brd.order = UpdateOrder::FixedAscending;
  else if (order == "permuted")
    scenario.brd.order = UpdateOrder::SeededPermutation;
  else
    fail(origin, "policy.update_order must be 'fixed' or 'permuted'");
  scenario.brd.order_seed = get_seed(obj, origin, "policy", "order_seed", 0);
}

void parse_neighborhoods(const json& obj, const std::string& origin,
                         const std::string& base_dir, RunConfig& config) {
  if (const json* file = find(obj, "file")) {
    check_keys(obj, origin, "neighborhoods", {"file"});
    if (!file->is_string()) fail(origin, "neighborhoods.file must be a path string");
    config.scenario.neighborhoods =
        load_neighborhood_file(resolve_path(base_dir, file->get<std::string>()));
    return;
  }
  check_keys(obj, origin, "neighborhoods", {"split_at"});
  const json* split = find(obj, "split_at");
  if (!split) fail(origin, "neighborhoods needs either 'file' or 'split_at'");
  if (!split->is_number_integer()) fail(origin, "neighborhoods.split_at must be a bus id");
  config.neighborhood_split_at = split->get<int>();
}

void parse_pilot_nodes(const json& j, const std::string& origin, ScenarioConfig& scenario) {
  if (j.is_string()) {
    if (j.get<std::string>() != "all")
      fail(origin, "pilot_nodes must be \"all\" or a list of bus ids");
    scenario.pilot_nodes.clear();  // empty selects every non-slack bus
    return;
  }
  if (!j.is_array()) fail(origin, "pilot_nodes must be \"all\" or a list of bus ids");
  scenario.pilot_nodes.clear();
  for (const json& node : j) {
    if (!node.is_number_integer()) fail(origin, "pilot_nodes entries must be bus ids");
    scenario.pilot_nodes.push_back(node.get<int>());
  }
}

void parse_montecarlo(const json& obj, const std::string& origin, RunConfig& config) {
  check_keys(obj, origin, "montecarlo", {"draws", "fleet_sizes", "parallel", "policies"});
  MonteCarloConfig& mc = config.montecarlo;
  mc.draws = get_int(obj, origin, "montecarlo", "draws", mc.draws);
  if (const json* sizes = find(obj, "fleet_sizes")) {
    if (!sizes->is_array()) fail(origin, "montecarlo.fleet_sizes must be a list");
    mc.fleet_sizes.clear();
    for (const json& size : *sizes) {
      if (!size.is_number_integer()) fail(origin, "montecarlo.fleet_sizes must be integers");
      mc.fleet_sizes.push_back(size.get<int>());
    }
  }
  mc.mode = get_bool(obj, origin, "montecarlo", "parallel", true) ? ExecutionMode::OpenMP
                                                                  : ExecutionMode::Serial;
  if (const json* policies = find(obj, "policies")) {
    if (!policies->is_array()) fail(origin, "montecarlo.policies must be a list of names");
    mc.policies.clear();
    for (const json& name : *policies) {
      if (!name.is_string()) fail(origin, "montecarlo.policies entries must be names");
      mc.policies.push_back(policy_from_string(name.get<std::string>()));
    }
    if (mc.policies.empty()) fail(origin, "montecarlo.policies must not be empty");
  }
}

void parse_calibrate(const json& obj, const std::string& origin, RunConfig& config) {
  check_keys(obj, origin, "calibrate",
             {"target_min_v", "tolerance", "section_lo_ohm", "section_hi_ohm",
              "max_evaluations", "n_vehicles", "stress_seed"});
  CalibrationConfig& cal = config.calibration;
  cal.target_min_v_pu =
      get_number(obj, origin, "calibrate", "target_min_v", cal.target_min_v_pu);
  cal.tolerance_pu = get_number(obj, origin, "calibrate", "tolerance", cal.tolerance_pu);
  cal.section_lo_ohm =
      get_number(obj, origin, "calibrate", "section_lo_ohm", cal.section_lo_ohm);
  cal.section_hi_ohm =
      get_number(obj, origin, "calibrate", "section_hi_ohm", cal.section_hi_ohm);
  cal.max_evaluations =
      get_int(obj, origin, "calibrate", "max_evaluations", cal.max_evaluations);
  cal.n_vehicles = get_int(obj, origin, "calibrate", "n_vehicles", cal.n_vehicles);
  cal.seed = get_seed(obj, origin, "calibrate", "stress_seed", cal.seed);
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin,
                           const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // The library's message already carries line and column.
    throw ConfigError(origin + ": " + e.what());
  }
  if (!doc.is_object()) fail(origin, "the configuration must be a JSON object");

  check_keys(doc, origin, "the configuration",
             {"version", "seed", "feeder", "base_load", "horizon", "fleet", "policy",
              "metric", "band", "v_ref", "pilot_nodes", "neighborhoods", "droop",
              "report_node", "load_flow", "montecarlo", "calibrate"});

  const json* version = find(doc, "version");
  if (!version) fail(origin, "missing required key 'version'");
  if (!version->is_number_integer() || version->get<int>() != 1)
    fail(origin, "unsupported config version (expected 1)");

  RunConfig config;
  config.seed = get_seed(doc, origin, "the configuration", "seed", config.seed);

  if (const json* feeder = find(doc, "feeder")) {
    if (!feeder->is_string()) fail(origin, "'feeder' must be a path string");
    config.feeder_path = resolve_path(base_dir, feeder->get<std::string>());
  }

  if (const json* base = find(doc, "base_load")) {
    if (!base->is_object()) fail(origin, "'base_load' must be an object");
    check_keys(*base, origin, "base_load", {"p_kw", "q_kvar"});
    BaseLoadOverride load;
    load.p_kw = get_number(*base, origin, "base_load", "p_kw", 0.0);
    load.q_kvar = get_number(*base, origin, "base_load", "q_kvar", 0.0);
    if (load.p_kw < 0.0 || load.q_kvar < 0.0)
      fail(origin, "base_load components must be non-negative");
    config.base_load = load;
  }

  if (find(doc, "horizon"))
    parse_horizon(require_object(doc, origin, "horizon"), origin, config.scenario.horizon);
  if (find(doc, "fleet"))
    parse_fleet(require_object(doc, origin, "fleet"), origin, base_dir, config);
  if (find(doc, "policy"))
    parse_policy(require_object(doc, origin, "policy"), origin, config.scenario);

  const std::string metric =
      get_string(doc, origin, "the configuration", "metric", "quadratic");
  if (metric == "quadratic")
    config.scenario.metric = PenaltyKind::Quadratic;
  else if (metric == "crenel")
    config.scenario.metric = PenaltyKind::Crenel;
  else
    fail(origin, "metric must be 'quadratic' or 'crenel'");

  if (const json* band = find(doc, "band")) {
    if (!band->is_object()) fail(origin, "'band' must be an object");
    check_keys(*band, origin, "band", {"v_lo", "v_hi"});
    config.scenario.band.v_lo =
        get_number(*band, origin, "band", "v_lo", config.scenario.band.v_lo);
    config.scenario.band.v_hi =
        get_number(*band, origin, "band", "v_hi", config.scenario.band.v_hi);
    if (config.scenario.band.v_lo >= config.scenario.band.v_hi)
      fail(origin, "band.v_lo must lie below band.v_hi");
  }
  config.scenario.v_ref =
      get_number(doc, origin, "the configuration", "v_ref", config.scenario.v_ref);

  if (const json* pilots = find(doc, "pilot_nodes"))
    parse_pilot_nodes(*pilots, origin, config.scenario);
  if (find(doc, "neighborhoods"))
    parse_neighborhoods(require_object(doc, origin, "neighborhoods"), origin, base_dir,
                        config);

  if (const json* droop = find(doc, "droop")) {
    if (!droop->is_object()) fail(origin, "'droop' must be an object");
    check_keys(*droop, origin, "droop", {"v_zero", "v_full", "p_ceiling_kw"});
    DroopCurve& curve = config.scenario.droop;
    curve.v_zero = get_number(*droop, origin, "droop", "v_zero", curve.v_zero);
    curve.v_full = get_number(*droop, origin, "droop", "v_full", curve.v_full);
    curve.p_ceiling_kw = get_number(*droop, origin, "droop", "p_ceiling_kw", curve.p_ceiling_kw);
  }

  config.scenario.report_node =
      get_int(doc, origin, "the configuration", "report_node", config.scenario.report_node);

  if (const json* flow = find(doc, "load_flow")) {
    if (!flow->is_object()) fail(origin, "'load_flow' must be an object");
    check_keys(*flow, origin, "load_flow", {"tolerance", "max_iterations"});
    config.scenario.flow.tolerance =
        get_number(*flow, origin, "load_flow", "tolerance", config.scenario.flow.tolerance);
    config.scenario.flow.max_iterations = get_int(*flow, origin, "load_flow",
                                                  "max_iterations",
                                                  config.scenario.flow.max_iterations);
  }

  if (find(doc, "montecarlo"))
    parse_montecarlo(require_object(doc, origin, "montecarlo"), origin, config);
  if (find(doc, "calibrate"))
    parse_calibrate(require_object(doc, origin, "calibrate"), origin, config);

  // The harness blocks carry their own copies of the shared settings.
  config.montecarlo.master_seed = config.seed;
  config.montecarlo.fleet = config.fleet;
  config.montecarlo.scenario = config.scenario;
  config.calibration.fleet = config.fleet;
  config.calibration.scenario = config.scenario;
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string base_dir = std::filesystem::path(path).parent_path().string();
  return parse_run_config(buffer.str(), path, base_dir.empty() ? "." : base_dir);
}

FeederModel load_configured_feeder(const RunConfig& config) {
  if (config.feeder_path.empty())
    throw ConfigError("this command needs a feeder: add a 'feeder' path to the config");
  FeederModel model = load_feeder_file(config.feeder_path);
  if (!config.base_load) return model;

  std::vector<Bus> buses = model.buses();
  for (Bus& bus : buses) {
    if (bus.is_slack) continue;
    bus.base_load_p_kw = config.base_load->p_kw;
    bus.base_load_q_kvar = config.base_load->q_kvar;
  }
  std::vector<Line> lines = model.lines();
  return FeederModel(std::move(buses), std::move(lines), model.base_voltage_v(),
                     model.base_power_va());
}

void finalize_run_config(RunConfig& config, const FeederModel& model) {
  if (config.neighborhood_split_at) {
    const std::vector<int> nodes = model.load_bus_ids();
    const std::vector<int>& pilots =
        config.scenario.pilot_nodes.empty() ? nodes : config.scenario.pilot_nodes;
    config.scenario.neighborhoods =
        two_zone_neighborhoods(nodes, pilots, *config.neighborhood_split_at);
  }
  config.montecarlo.scenario = config.scenario;
  config.montecarlo.fleet = config.fleet;
  config.calibration.scenario = config.scenario;
  config.calibration.fleet = config.fleet;
}

FleetSample resolve_fleet(const RunConfig& config, const FeederModel& model) {
  if (config.fleet_file) {
    FleetSample sample;
    sample.vehicles = load_fleet_file(*config.fleet_file);
    validate_fleet(sample.vehicles, config.scenario.horizon.n_slots());
    return sample;
  }
  return sample_fleet(config.fleet, config.scenario.horizon, model.load_bus_ids(),
                      config.seed);
}

}  // namespace evcoord
