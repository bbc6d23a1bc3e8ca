#include "cavsim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cavsim {

namespace {

constexpr double kScanStep = 0.05;   // coarse feasibility scan resolution [s]
constexpr double kBisectTol = 1e-4;  // exit-time refinement tolerance [s]

/// Outcome of testing one candidate exit time.
struct Verdict {
  bool ok = true;
  ConstraintKind failed = ConstraintKind::None;
  int blocking_vehicle = -1;
  int conflict_id = -1;
};

Verdict check_candidate(double tf_local, const PlanningContext& ctx,
                        const Limits& limits, const SafetyParams& safety) {
  const CubicTrajectory local(ctx.v0, ctx.zone_length, tf_local);
  if (!is_state_control_feasible(local, limits))
    return {false, ConstraintKind::StateControl, -1, -1};

  const CubicTrajectory abs = local.shifted(ctx.t0);
  if (ctx.predecessor) {
    const PlannedTrajectory& pred = *ctx.predecessor;
    const double t_end = std::min(abs.tf(), pred.exit_time());
    if (!rear_end_satisfied(abs, pred.traj, ctx.predecessor_offset, safety,
                            abs.t0(), t_end))
      return {false, ConstraintKind::RearEnd, pred.vehicle_id, -1};
  }
  for (const ConflictConstraint& c : ctx.conflicts) {
    if (!lateral_satisfied(abs, c.own_position, c.other.traj, c.other_position, safety))
      return {false, ConstraintKind::Lateral, c.other.vehicle_id, c.conflict_id};
  }
  return {};
}

} // namespace

const char* to_string(ConstraintKind kind) {
  switch (kind) {
  case ConstraintKind::None: return "none";
  case ConstraintKind::StateControl: return "state/control bounds";
  case ConstraintKind::RearEnd: return "rear-end";
  case ConstraintKind::Lateral: return "lateral";
  }
  return "unknown";
}

PlanningContext Coordinator::register_entry(int vehicle_id, const std::string& path_id,
                                            double t0, double v0, const Limits& limits,
                                            std::optional<double> origin_s) const {
  if (!limits.contains_speed(v0))
    throw std::invalid_argument("register_entry: entry speed " + std::to_string(v0) +
                                " outside [v_min, v_max]");
  const Path& own = net_->path(path_id);
  const double origin = origin_s.value_or(own.cz_start);
  if (origin < own.cz_start - 1e-9 || origin >= own.cz_end)
    throw std::invalid_argument("register_entry: plan origin outside the control zone");

  PlanningContext ctx;
  ctx.vehicle_id = vehicle_id;
  ctx.path_id = path_id;
  ctx.t0 = t0;
  ctx.v0 = v0;
  ctx.origin_s = origin;
  ctx.zone_length = own.cz_end - origin;
  ctx.revision = revision_;

  // Nearest predecessor: the last stored trajectory on the same path. FIFO
  // storage means later entries trail earlier ones, and the rear-end
  // constraint chains through consecutive pairs.
  for (auto it = store_.rbegin(); it != store_.rend(); ++it) {
    if (it->path_id == path_id) {
      ctx.predecessor = *it;
      ctx.predecessor_offset = it->origin_s - origin;
      break;
    }
  }

  for (const ConflictPoint& cp : net_->conflicts_for(path_id)) {
    const double own_local = cp.s_a - origin;
    if (own_local < 0.0)
      continue; // conflict already behind the plan's start
    for (const PlannedTrajectory& stored : store_) {
      if (stored.path_id != cp.path_b)
        continue;
      const double other_local = cp.s_b - stored.origin_s;
      if (other_local < 0.0)
        continue; // the stored vehicle passed this point before planning
      ctx.conflicts.push_back(
          ConflictConstraint{cp.id, own_local, other_local, stored});
    }
  }
  return ctx;
}

void Coordinator::store(const PlannedTrajectory& planned, std::uint64_t context_revision) {
  if (context_revision != revision_)
    throw std::runtime_error("Coordinator::store: stale planning context for vehicle " +
                             std::to_string(planned.vehicle_id) + " (re-plan required)");
  if (!store_.empty() && planned.entry_time() < store_.back().entry_time() - 1e-12)
    throw std::invalid_argument("Coordinator::store: entry times must be FIFO-ordered");
  store_.push_back(planned);
  ++revision_;
}

void Coordinator::purge_exited(double now) {
  std::erase_if(store_, [now](const PlannedTrajectory& p) { return p.exit_time() < now; });
}

PlannedTrajectory plan(const PlanningContext& ctx, const Limits& limits,
                       const SafetyParams& safety) {
  const ExitTimeBounds bounds = exit_time_bounds(ctx.v0, ctx.zone_length, limits);

  // Coarse scan at kScanStep, always sampling both interval endpoints.
  const int steps =
      std::max(1, static_cast<int>(std::ceil((bounds.t_ub - bounds.t_lb) / kScanStep)));
  double prev = bounds.t_lb;
  double lo = -1.0, hi = -1.0;
  std::map<ConstraintKind, int> failures;
  Verdict last_verdict;
  for (int i = 0; i <= steps; ++i) {
    const double tf = i == steps ? bounds.t_ub
                                 : std::min(bounds.t_lb + i * kScanStep, bounds.t_ub);
    const Verdict v = check_candidate(tf, ctx, limits, safety);
    if (v.ok) {
      lo = i == 0 ? tf : prev;
      hi = tf;
      break;
    }
    ++failures[v.failed];
    last_verdict = v;
    prev = tf;
  }

  if (hi < 0.0) {
    ConstraintKind worst = last_verdict.failed;
    int worst_count = 0;
    for (const auto& [kind, count] : failures) {
      if (count > worst_count) {
        worst = kind;
        worst_count = count;
      }
    }
    throw NoFeasibleExitTime(
        "no feasible exit time in [" + std::to_string(bounds.t_lb) + ", " +
            std::to_string(bounds.t_ub) + "] for vehicle " +
            std::to_string(ctx.vehicle_id) + "; binding constraint: " +
            to_string(worst),
        worst, last_verdict.blocking_vehicle, last_verdict.conflict_id);
  }

  // Refine the infeasible/feasible bracket; hi stays feasible throughout.
  if (lo < hi) {
    while (hi - lo > kBisectTol) {
      const double mid = 0.5 * (lo + hi);
      if (check_candidate(mid, ctx, limits, safety).ok)
        hi = mid;
      else
        lo = mid;
    }
  }

  const CubicTrajectory traj = CubicTrajectory(ctx.v0, ctx.zone_length, hi).shifted(ctx.t0);
  return PlannedTrajectory(ctx.vehicle_id, ctx.path_id, traj, ctx.origin_s);
}

} // namespace cavsim
