#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavsim/baseline.hpp"
#include "cavsim/roadnet.hpp"
#include "cavsim/safety.hpp"
#include "cavsim/trajectory.hpp"

namespace cavsim {

/** One scheduled vehicle release. */
struct SpawnEvent {
  int vehicle_id = 0;
  std::string path_id;
  double time = 0.0;  ///< release time [s]
  double speed = 0.0; ///< release speed [m/s]
};

/** A path plus its routing/controller annotations. */
struct PathConfig {
  Path path;
  std::optional<double> entry_speed_cap; ///< pre-zone desired-speed cap [m/s]
  std::string next; ///< id of the path a vehicle continues onto; empty = despawn
  bool loop = false; ///< wrap to the path start instead of despawning
  bool ego = false;  ///< vehicles on this path count toward ego metrics
};

/** A yield sign on an approach path, giving way to mainline traffic. */
struct YieldConfig {
  std::string approach_path;
  double line_s = 0.0; ///< stop-line arc length on the approach path [m]
  YieldZone zone;      ///< mainline zone the approach yields to
};

/** One approach leg of a stop-sign intersection. */
struct StopApproach {
  std::string path_id;
  double enqueue_s = 0.0; ///< queue-entry arc length (approach segment start) [m]
  double line_s = 0.0;    ///< stop-line arc length [m]
  double zone_end_s = 0.0; ///< end of the merging zone on this path [m]
};

/** A four-way-stop intersection managed by a FIFO queue. */
struct StopConfig {
  std::string id;
  std::vector<StopApproach> approaches;
};

/**
 * @brief Full experiment description: geometry, limits, schedule, and run
 * options. Serializes to a JSON document with units in the field names.
 */
struct ScenarioConfig {
  std::string name;
  double speed_limit = 0.5; ///< city-wide limit, baseline desired speed [m/s]
  double duration = 60.0;   ///< simulated time [s]
  int repetitions = 1;
  unsigned long long seed = 1;
  std::string tracking = "exact"; ///< "exact" | "lagged"
  double outside_zone_cap = 0.5;  ///< desired speed outside control zones, optimal mode [m/s]

  Limits limits;
  SafetyParams safety;
  IdmParams idm;

  std::vector<PathConfig> paths;
  std::vector<ConflictPoint> conflicts; ///< declared conflict points (empty = detect)
  std::vector<SpawnEvent> spawns;
  std::vector<YieldConfig> yields;
  std::vector<StopConfig> stops;

  /** @return every validation error found (empty means the config is usable). */
  std::vector<std::string> validate() const;

  /** @brief Assemble the road network and its conflict registry.
   *  @throws std::invalid_argument on geometry errors. */
  RoadNetwork build_network() const;

  const PathConfig* find_path(const std::string& id) const;
};

/** Carries the full list of validation problems for a rejected scenario. */
class ScenarioError : public std::runtime_error {
public:
  ScenarioError(const std::string& what, std::vector<std::string> errors)
      : std::runtime_error(what), errors(std::move(errors)) {}
  std::vector<std::string> errors;
};

/**
 * @brief Parse and validate a scenario file.
 * @throws ScenarioError listing every problem (parse errors fail fast).
 */
ScenarioConfig load_scenario(const std::string& file_path);

/** @brief Parse a scenario from JSON text (same contract as load_scenario). */
ScenarioConfig parse_scenario(const std::string& json_text, const std::string& origin);

/** @brief Canonical JSON serialization; load(serialize(c)) reproduces c. */
std::string serialize_scenario(const ScenarioConfig& config);

/** @brief FNV-1a hash of the canonical serialization, for pairing runs. */
std::string scenario_hash(const ScenarioConfig& config);

} // namespace cavsim
