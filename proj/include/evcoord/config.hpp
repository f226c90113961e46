#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "evcoord/calibrate.hpp"
#include "evcoord/feeder.hpp"
#include "evcoord/fleet.hpp"
#include "evcoord/scenario.hpp"

namespace evcoord {

// Uniform household load applied to every non-slack bus, replacing whatever
// the feeder file carries.
struct BaseLoadOverride {
  double p_kw = 0.0;
  double q_kvar = 0.0;
};

// One JSON document drives every command. The schema is versioned and
// closed: unknown keys are rejected so typos cannot silently revert a value
// to its default. Relative file paths resolve against the config's own
// directory, so a config bundle can be moved as a unit.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string feeder_path;  // empty when the document names no feeder
  std::optional<BaseLoadOverride> base_load;
  std::optional<std::string> fleet_file;  // exclusive with sampling parameters
  std::optional<int> neighborhood_split_at;  // resolved once the feeder is known
  FleetSpec fleet;
  ScenarioConfig scenario;
  MonteCarloConfig montecarlo;    // carries copies of `fleet` and `scenario`
  CalibrationConfig calibration;  // likewise
};

// Parses the JSON text. `origin` names the source in diagnostics;
// `base_dir` anchors relative paths found inside the document.
RunConfig parse_run_config(const std::string& text, const std::string& origin,
                           const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

// Loads the configured feeder file and applies the base-load override.
// Throws ConfigError when the document names no feeder or the file is
// missing (the message names the path).
FeederModel load_configured_feeder(const RunConfig& config);

// Completes the feeder-dependent settings: builds the two-zone neighborhood
// map when the document asked for a bus-id split, then refreshes the
// scenario and fleet copies inside the Monte Carlo and calibration blocks.
void finalize_run_config(RunConfig& config, const FeederModel& model);

// The fleet a run should use: the fleet file when one is configured,
// otherwise a sample drawn with the manifest seed on the feeder's load
// buses. Sampled fleets may carry horizon-truncation warnings.
FleetSample resolve_fleet(const RunConfig& config, const FeederModel& model);

}  // namespace evcoord
