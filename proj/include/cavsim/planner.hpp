#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavsim/roadnet.hpp"
#include "cavsim/safety.hpp"
#include "cavsim/trajectory.hpp"

namespace cavsim {

/**
 * @brief A trajectory committed to the coordinator, stamped in absolute time.
 *
 * The cubic's t0 is the planning start time and its tf the planned exit time.
 * Positions are local to the plan's frame, whose origin sits at path arc
 * length origin_s (the control-zone entrance, except for mid-zone re-plans).
 */
struct PlannedTrajectory {
  int vehicle_id;
  std::string path_id;
  CubicTrajectory traj;
  double origin_s;

  PlannedTrajectory(int vehicle_id, std::string path_id, CubicTrajectory traj,
                    double origin_s)
      : vehicle_id(vehicle_id), path_id(std::move(path_id)), traj(std::move(traj)),
        origin_s(origin_s) {}

  double entry_time() const { return traj.t0(); }
  double exit_time() const { return traj.tf(); }
};

/** Constraint class that blocked a plan, for diagnostics. */
enum class ConstraintKind { None, StateControl, RearEnd, Lateral };

const char* to_string(ConstraintKind kind);

/** Thrown when no exit time in [t_lb, t_ub] satisfies every constraint. */
class NoFeasibleExitTime : public std::runtime_error {
public:
  NoFeasibleExitTime(const std::string& what, ConstraintKind binding,
                     int blocking_vehicle, int conflict_id)
      : std::runtime_error(what), binding(binding),
        blocking_vehicle(blocking_vehicle), conflict_id(conflict_id) {}

  ConstraintKind binding;
  int blocking_vehicle; ///< id of the vehicle behind the binding constraint, or -1
  int conflict_id;      ///< conflict-point id for lateral constraints, or -1
};

/** One stored trajectory that shares a conflict point with the planning path. */
struct ConflictConstraint {
  int conflict_id;
  double own_position;   ///< conflict position in the ego zone frame [m]
  double other_position; ///< conflict position in the other vehicle's zone frame [m]
  PlannedTrajectory other;
};

/**
 * @brief Everything a CAV needs to solve its exit-time problem: the stored
 * trajectories that can interact with it, captured at a store revision so a
 * stale snapshot is detected at commit time.
 */
struct PlanningContext {
  int vehicle_id;
  std::string path_id;
  double t0;          ///< planning start time [s]
  double v0;          ///< speed at the planning start [m/s]
  double origin_s;    ///< path arc length of the plan frame's origin [m]
  double zone_length; ///< distance left to the control-zone exit S [m]
  std::optional<PlannedTrajectory> predecessor; ///< nearest stored leader on the same path
  double predecessor_offset = 0.0; ///< predecessor frame origin in the ego frame [m]
  std::vector<ConflictConstraint> conflicts;
  std::uint64_t revision;
};

/**
 * @brief FIFO store of the trajectories of all CAVs currently inside their
 * control zones, plus the conflict-point registry they are checked against.
 *
 * One planning transaction (register_entry / plan / store) runs at a time;
 * the revision counter catches a store that happened between a context
 * snapshot and its commit.
 */
class Coordinator {
public:
  /// @param net road network with a finalized conflict registry; must outlive
  ///            the coordinator.
  explicit Coordinator(const RoadNetwork& net) : net_(&net) {}

  /**
   * @brief Snapshot the stored trajectories relevant to a CAV entering at t0.
   *
   * Returns the nearest same-path predecessor still inside the zone and one
   * constraint per (stored vehicle, shared conflict point) pair. Constraints
   * for conflict points either party has already passed are dropped.
   *
   * @param origin_s plan frame origin as path arc length; defaults to the
   *                 control-zone entrance. Mid-zone re-plans pass the current
   *                 position.
   * @throws std::invalid_argument for an entry speed outside [v_min, v_max]
   *         or a plan origin outside the control zone; unknown paths surface
   *         as std::out_of_range from the network lookup.
   */
  PlanningContext register_entry(int vehicle_id, const std::string& path_id,
                                 double t0, double v0, const Limits& limits,
                                 std::optional<double> origin_s = std::nullopt) const;

  /**
   * @brief Append a planned trajectory to the store.
   * @throws std::runtime_error if the context revision is stale (another
   *         trajectory was stored after the context snapshot).
   */
  void store(const PlannedTrajectory& planned, std::uint64_t context_revision);

  /** @brief Drop every trajectory whose exit time precedes @p now. */
  void purge_exited(double now);

  const std::vector<PlannedTrajectory>& stored() const { return store_; }
  std::uint64_t revision() const { return revision_; }

private:
  const RoadNetwork* net_;
  std::vector<PlannedTrajectory> store_;
  std::uint64_t revision_ = 0;
};

/**
 * @brief Solve for the minimal feasible exit time.
 *
 * Scans [t_lb, t_ub] at 50 ms resolution for the first feasible exit time,
 * then bisects the preceding infeasible/feasible bracket down to 1e-4 s.
 * The scan is needed because occupancy windows split the interval into
 * feasible/infeasible bands; the earliest band yields the minimum.
 *
 * @throws NoFeasibleExitTime when every scanned candidate violates a
 *         constraint; the exception names the binding constraint.
 */
PlannedTrajectory plan(const PlanningContext& ctx, const Limits& limits,
                       const SafetyParams& safety);

} // namespace cavsim
