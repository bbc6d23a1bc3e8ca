#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cavsim/engine.hpp"

namespace cavsim {

/**
 * CSV writers for the plot-ready run data. All files carry a header row and
 * radix-point decimals with 9 significant digits, so any language's oracle
 * scripts can parse them. Column sets are fixed:
 *
 *  - trajectories.csv:   time_s, vehicle_id, path_id, path_position_m,
 *                        route_position_m, speed_mps, accel_mps2, mode, in_zone
 *  - planning.csv:       vehicle_id, path_id, t_entry_s, v_entry_mps,
 *                        zone_length_m, t_lb_s, t_ub_s, tf_planned_s,
 *                        tf_actual_s, replans, degraded, superseded
 *  - speed_position.csv: vehicle_id, route_position_m, speed_mps, time_s, ego
 *  - time_position.csv:  vehicle_id, time_s, route_position_m, path_id, in_zone
 */
void write_trajectories_csv(const SimLog& log, const ScenarioConfig& config,
                            const std::string& file_path);
void write_planning_csv(const SimLog& log, const std::string& file_path);
void write_speed_position_csv(const SimLog& log, const ScenarioConfig& config,
                              const std::string& file_path);
void write_time_position_csv(const SimLog& log, const ScenarioConfig& config,
                             const std::string& file_path);

/**
 * @brief Run a scenario `repetitions` times (seeds base, base+1, ...), write
 * per-repetition CSVs and a combined metrics.json under @p out_dir.
 *
 * Layout: a single repetition writes CSVs directly into @p out_dir; several
 * repetitions write into rep_1/, rep_2/, ... subdirectories. metrics.json
 * always lands at the top level.
 *
 * @return 0 on success, 3 when any repetition recorded a safety violation.
 * @throws std::runtime_error on I/O failures.
 */
int run_experiment(const ScenarioConfig& config, RunMode mode,
                   TrackingModel tracking, double duration, int repetitions,
                   std::uint64_t seed, const std::string& out_dir);

/**
 * @brief Compare two metrics.json files from runs of the same scenario and
 * print a report (travel time delta, speed comparison, stop counts).
 *
 * @return 0 on success, 2 when the scenario hashes do not match.
 * @throws std::runtime_error when a file cannot be read or parsed.
 */
int compare_runs(const std::string& optimal_metrics_file,
                 const std::string& baseline_metrics_file, std::ostream& out);

} // namespace cavsim
