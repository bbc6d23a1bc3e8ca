#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cavsim/planner.hpp"
#include "cavsim/scenario.hpp"

namespace cavsim {

enum class RunMode { Optimal, Baseline };
enum class TrackingModel { Exact, Lagged };
enum class VehicleMode { Baseline, Planned, Degraded };

const char* to_string(RunMode mode);
const char* to_string(TrackingModel tracking);
const char* to_string(VehicleMode mode);
RunMode run_mode_from_string(const std::string& text);
TrackingModel tracking_from_string(const std::string& text);

/** Double-integrator state of one vehicle, plus its controller bookkeeping. */
struct VehicleState {
  int id = -1;
  std::string path_id;
  double p = 0.0; ///< arc-length position on the current path [m]
  double v = 0.0; ///< speed [m/s]
  double u = 0.0; ///< applied control [m/s^2]
  double route_position = 0.0; ///< odometer since spawn [m]
  VehicleMode mode = VehicleMode::Baseline;
  bool ego = false;

  std::optional<PlannedTrajectory> plan;
  double plan_origin_s = 0.0; ///< path arc length where the plan's frame starts

  double spawn_time = 0.0;
  double u_actuated = 0.0;      ///< actuator state for lagged tracking
  double next_replan_time = 0.0; ///< degraded-mode retry deadline
  int replans = 0;               ///< re-plan attempts in the current zone

  // full-stop detection
  double slow_since = -1.0;
  bool in_stop_event = false;
  int stop_count = 0;
};

/** One simulation sample: a vehicle's state at the end of a tick. */
struct TickRecord {
  double time;
  int vehicle_id;
  int path_index; ///< index into ScenarioConfig::paths
  double p;
  double route_position;
  double v;
  double u;
  VehicleMode mode;
  bool in_zone; ///< p within the path's control-zone interval
};

/** One control-zone planning transaction (or its failure). */
struct PlanningEvent {
  int vehicle_id;
  std::string path_id;
  double t_entry;     ///< absolute zone (or re-plan) start time [s]
  double v_entry;     ///< speed the plan starts from [m/s]
  double zone_length; ///< distance covered by the plan [m]
  double t_lb;        ///< earliest feasible exit, absolute [s]
  double t_ub;        ///< latest feasible exit, absolute [s]
  double tf_planned;  ///< committed exit time, absolute [s]; -1 when degraded
  double tf_actual = -1.0; ///< observed zone exit, absolute [s]; -1 until exit
  int replans = 0;    ///< prior failed attempts in this zone passage
  bool degraded = false; ///< true when no feasible exit time existed
  bool superseded = false; ///< replaced by a later re-plan of the same passage
};

/** Lifetime summary of one vehicle. */
struct VehicleSummary {
  int id;
  std::string spawn_path;
  bool ego = false;
  double spawn_time = 0.0;
  double exit_time = -1.0; ///< despawn time; -1 while active
  int stops = 0;
  double min_speed = std::numeric_limits<double>::infinity();
  double speed_sum = 0.0;
  long speed_samples = 0;
  double zone_min_speed = std::numeric_limits<double>::infinity();
  double zone_speed_sum = 0.0;
  long zone_speed_samples = 0;
};

/** Complete, deterministic record of one run. */
struct SimLog {
  double dt = 0.0;
  double duration = 0.0;
  RunMode mode = RunMode::Optimal;
  TrackingModel tracking = TrackingModel::Exact;
  std::uint64_t seed = 0;

  std::vector<TickRecord> ticks;
  std::vector<PlanningEvent> plans;
  std::vector<VehicleSummary> vehicles;

  int rear_end_violations = 0; ///< planned-pair safe-gap slack events
  int lateral_violations = 0;  ///< simultaneous conflict-point occupancy events
  int physical_collisions = 0; ///< bumper overlap events, any mode
  double min_rear_end_slack = std::numeric_limits<double>::infinity();

  int spawned = 0;
  int exited = 0;
};

/** Ego-restricted aggregates for the corridor comparison. */
struct EgoMetrics {
  int vehicle_count = 0;
  double avg_speed = 0.0;
  double min_speed = 0.0;
  int stops_min = 0;
  int stops_max = 0;
  double avg_travel_time = 0.0; ///< mean spawn-to-despawn time of exited egos [s]
  int completed = 0;            ///< egos that reached the route end
};

/** Table-style aggregates of a run. */
struct Metrics {
  double v_min_zone = 0.0; ///< restricted to in-control-zone samples
  double v_avg_zone = 0.0;
  double v_min_all = 0.0;
  double v_avg_all = 0.0;
  double rmse_exit_time_pct = 0.0; ///< planned-vs-actual exit, % of planned zone time
  int planned_count = 0;
  int degraded_count = 0;
  int rear_end_violations = 0;
  int lateral_violations = 0;
  int physical_collisions = 0;
  double min_rear_end_slack = std::numeric_limits<double>::infinity();
  int spawned = 0;
  int exited = 0;
  std::optional<EgoMetrics> ego;
};

/**
 * @brief Fixed-step (10 ms), single-threaded, deterministic simulation.
 *
 * Vehicles spawn on schedule, drive under the intelligent driver model, and —
 * in optimal mode — commit to an energy-optimal cubic on crossing a
 * control-zone entry, tracking it exactly or through a first-order actuator
 * lag. Baseline mode replaces coordination with yield signs and stop queues.
 */
class Simulation {
public:
  static constexpr double kDt = 0.01;       ///< integration step [s]
  static constexpr double kLagTau = 0.2;    ///< actuator lag time constant [s]
  static constexpr double kSpeedNoise = 0.01; ///< lagged-mode speed noise [m/s per sqrt(s)]
  static constexpr double kReplanPeriod = 0.5; ///< degraded-mode retry period [s]

  Simulation(const ScenarioConfig& config, RunMode mode, TrackingModel tracking,
             std::uint64_t seed);

  /** @brief Advance the world by one kDt tick. */
  void step();

  /** @brief Run for @p duration seconds and surrender the log. */
  SimLog run(double duration);

  double now() const { return now_; }
  const std::vector<VehicleState>& vehicles() const { return vehicles_; }
  const SimLog& log() const { return log_; }
  const RoadNetwork& network() const { return net_; }

private:
  struct StopState {
    const StopConfig* config = nullptr;
    StopQueue queue;
    std::vector<int> released; ///< released but not yet clear of the zone
  };

  const PathConfig& path_config(const std::string& id) const;
  int path_index(const std::string& id) const;
  const PathConfig* next_path(const PathConfig& current) const;

  double desired_speed(const VehicleState& vehicle) const;
  /// @return gap to route leader [m] and its speed; gap = +inf when free.
  std::pair<double, double> leader_gap(const VehicleState& vehicle) const;
  double baseline_accel(const VehicleState& vehicle) const;
  double wall_accel(const VehicleState& vehicle, double line_s) const;

  void process_spawns();
  void apply_controls_and_integrate();
  void handle_path_transitions();
  void handle_zone_entries(double tick_start, double tick_end);
  void attempt_plan(VehicleState& vehicle, double t_cross, double v_cross,
                    double origin_s);
  void handle_zone_exits();
  void update_stop_queues();
  void monitor_safety();
  void record_tick();

  ScenarioConfig config_;
  RoadNetwork net_;
  RunMode mode_;
  TrackingModel tracking_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};

  double now_ = 0.0;
  long tick_index_ = 0;
  std::vector<VehicleState> vehicles_; ///< active vehicles in spawn order
  std::vector<double> prev_positions_; ///< per-vehicle p at the previous tick
  std::size_t next_spawn_ = 0;
  std::vector<SpawnEvent> spawn_schedule_;
  std::vector<SpawnEvent> pending_spawns_; ///< due but blocked by occupied entry
  Coordinator coordinator_;
  std::map<std::string, StopState> stops_;
  std::map<int, std::size_t> summary_index_;    ///< vehicle id -> vehicles index
  std::map<int, std::size_t> open_plan_events_; ///< vehicle id -> plans index
  std::vector<std::pair<int, int>> colliding_pairs_;
  std::vector<std::pair<int, int>> slack_violating_pairs_;
  std::vector<int> occupied_conflicts_; ///< conflict ids currently double-occupied
  SimLog log_;
};

/** One-call convenience wrapper around Simulation. */
SimLog run_simulation(const ScenarioConfig& config, RunMode mode,
                      TrackingModel tracking, std::uint64_t seed, double duration);

/**
 * @brief Aggregate a log into Table-style metrics.
 * @throws std::invalid_argument on an empty log (no tick records).
 */
Metrics compute_metrics(const SimLog& log);

} // namespace cavsim
