#include "cavsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cavsim {

namespace {

constexpr double kTol = 1e-12;          // time/position comparison slop
constexpr double kCollisionTol = 1e-6;  // slack below which a violation counts [m]
constexpr double kStopResetSpeed = 0.05; // hysteresis for full-stop counting [m/s]
constexpr double kMinReplanDistance = 0.05; // least zone remainder worth planning [m]
constexpr double kLeaderHorizon = 10.0; // ignore leaders farther than this [m]
constexpr double kTrackKp = 0.04; // lagged-tracking position feedback [1/s^2]
constexpr double kTrackKv = 0.1; // lagged-tracking speed feedback [1/s]

template <typename T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

template <typename T>
void remove_value(std::vector<T>& v, const T& x) {
  v.erase(std::remove(v.begin(), v.end(), x), v.end());
}

} // namespace

const char* to_string(RunMode mode) {
  return mode == RunMode::Optimal ? "optimal" : "baseline";
}

const char* to_string(TrackingModel tracking) {
  return tracking == TrackingModel::Exact ? "exact" : "lagged";
}

const char* to_string(VehicleMode mode) {
  switch (mode) {
  case VehicleMode::Baseline: return "baseline";
  case VehicleMode::Planned: return "planned";
  case VehicleMode::Degraded: return "degraded";
  }
  return "unknown";
}

RunMode run_mode_from_string(const std::string& text) {
  if (text == "optimal")
    return RunMode::Optimal;
  if (text == "baseline")
    return RunMode::Baseline;
  throw std::invalid_argument("mode must be \"optimal\" or \"baseline\", got \"" +
                              text + "\"");
}

TrackingModel tracking_from_string(const std::string& text) {
  if (text == "exact")
    return TrackingModel::Exact;
  if (text == "lagged")
    return TrackingModel::Lagged;
  throw std::invalid_argument("tracking must be \"exact\" or \"lagged\", got \"" +
                              text + "\"");
}

Simulation::Simulation(const ScenarioConfig& config, RunMode mode,
                       TrackingModel tracking, std::uint64_t seed)
    : config_(config), net_(config.build_network()), mode_(mode),
      tracking_(tracking), rng_(seed), coordinator_(net_) {
  std::vector<std::string> errors = config_.validate();
  if (!errors.empty())
    throw ScenarioError("scenario '" + config_.name + "' is invalid", std::move(errors));

  spawn_schedule_ = config_.spawns;
  std::sort(spawn_schedule_.begin(), spawn_schedule_.end(),
            [](const SpawnEvent& a, const SpawnEvent& b) {
              return a.time != b.time ? a.time < b.time : a.vehicle_id < b.vehicle_id;
            });
  for (const StopConfig& sc : config_.stops)
    stops_[sc.id].config = &sc;

  log_.dt = kDt;
  log_.mode = mode_;
  log_.tracking = tracking_;
  log_.seed = seed;
}

const PathConfig& Simulation::path_config(const std::string& id) const {
  const PathConfig* pc = config_.find_path(id);
  if (!pc)
    throw std::logic_error("engine: unknown path '" + id + "'");
  return *pc;
}

int Simulation::path_index(const std::string& id) const {
  for (std::size_t i = 0; i < config_.paths.size(); ++i)
    if (config_.paths[i].path.id == id)
      return static_cast<int>(i);
  throw std::logic_error("engine: unknown path '" + id + "'");
}

const PathConfig* Simulation::next_path(const PathConfig& current) const {
  if (current.loop)
    return &current;
  if (!current.next.empty())
    return &path_config(current.next);
  return nullptr;
}

double Simulation::desired_speed(const VehicleState& vehicle) const {
  if (mode_ == RunMode::Baseline)
    return config_.speed_limit;
  const PathConfig& pc = path_config(vehicle.path_id);
  if (vehicle.p >= pc.path.cz_start && vehicle.p <= pc.path.cz_end)
    return config_.speed_limit; // degraded vehicles may use the full limit
  double cap = config_.outside_zone_cap;
  if (vehicle.p < pc.path.cz_start && pc.entry_speed_cap)
    cap = std::min(cap, *pc.entry_speed_cap);
  return cap;
}

std::pair<double, double> Simulation::leader_gap(const VehicleState& vehicle) const {
  const double lam = config_.safety.vehicle_length;
  double best = std::numeric_limits<double>::infinity();
  double leader_speed = 0.0;

  for (const VehicleState& other : vehicles_) {
    if (other.id == vehicle.id || other.path_id != vehicle.path_id)
      continue;
    if (other.p > vehicle.p + kTol) {
      const double gap = other.p - vehicle.p - lam;
      if (gap < best) {
        best = gap;
        leader_speed = other.v;
      }
    }
  }
  if (best < kLeaderHorizon)
    return {best, leader_speed};

  // Nothing ahead on this path: look down the route (loop wraps onto itself).
  const PathConfig* current = &path_config(vehicle.path_id);
  double offset = current->path.length() - vehicle.p;
  const PathConfig* ahead = next_path(*current);
  for (int hop = 0; hop < 2 && ahead && offset < kLeaderHorizon; ++hop) {
    double nearest = std::numeric_limits<double>::infinity();
    double nearest_speed = 0.0;
    for (const VehicleState& other : vehicles_) {
      if (other.id == vehicle.id || other.path_id != ahead->path.id)
        continue;
      const double gap = offset + other.p - lam;
      if (gap < nearest) {
        nearest = gap;
        nearest_speed = other.v;
      }
    }
    if (nearest < best) {
      best = nearest;
      leader_speed = nearest_speed;
    }
    if (best < kLeaderHorizon)
      return {best, leader_speed};
    offset += ahead->path.length();
    ahead = next_path(*ahead);
  }
  return {best, leader_speed};
}

double Simulation::wall_accel(const VehicleState& vehicle, double line_s) const {
  IdmParams idm = config_.idm;
  idm.desired_speed = desired_speed(vehicle);
  return idm_accel(vehicle.v, vehicle.v, line_s - vehicle.p, idm, config_.limits);
}

double Simulation::baseline_accel(const VehicleState& vehicle) const {
  IdmParams idm = config_.idm;
  idm.desired_speed = desired_speed(vehicle);

  const auto [gap, leader_speed] = leader_gap(vehicle);
  double u = std::isfinite(gap)
                 ? idm_accel(vehicle.v, vehicle.v - leader_speed, gap, idm,
                             config_.limits)
                 : idm_accel_free(vehicle.v, idm, config_.limits);

  if (mode_ != RunMode::Baseline)
    return u;

  for (const YieldConfig& y : config_.yields) {
    if (y.approach_path != vehicle.path_id || vehicle.p >= y.line_s)
      continue;
    std::vector<double> mainline;
    for (const VehicleState& other : vehicles_)
      if (other.path_id == y.zone.mainline_path)
        mainline.push_back(other.p);
    if (yield_required(y.zone, mainline))
      u = std::min(u, wall_accel(vehicle, y.line_s));
  }

  for (const auto& [stop_id, st] : stops_) {
    for (const StopApproach& ap : st.config->approaches) {
      if (ap.path_id == vehicle.path_id && st.queue.contains(vehicle.id) &&
          vehicle.p < ap.line_s)
        u = std::min(u, wall_accel(vehicle, ap.line_s));
    }
  }
  return u;
}

void Simulation::process_spawns() {
  while (next_spawn_ < spawn_schedule_.size() &&
         spawn_schedule_[next_spawn_].time <= now_ + kTol) {
    pending_spawns_.push_back(spawn_schedule_[next_spawn_]);
    ++next_spawn_;
  }

  for (auto it = pending_spawns_.begin(); it != pending_spawns_.end();) {
    // Hold the release while the entry point is blocked.
    double clearance = std::numeric_limits<double>::infinity();
    for (const VehicleState& other : vehicles_)
      if (other.path_id == it->path_id)
        clearance = std::min(clearance, other.p - config_.safety.vehicle_length);
    if (clearance < config_.idm.jam_distance) {
      ++it;
      continue;
    }

    VehicleState vehicle;
    vehicle.id = it->vehicle_id;
    vehicle.path_id = it->path_id;
    vehicle.v = it->speed;
    vehicle.ego = path_config(it->path_id).ego;
    vehicle.spawn_time = now_;
    vehicles_.push_back(vehicle);
    prev_positions_.push_back(0.0);
    ++log_.spawned;

    VehicleSummary summary;
    summary.id = vehicle.id;
    summary.spawn_path = vehicle.path_id;
    summary.ego = vehicle.ego;
    summary.spawn_time = now_;
    summary_index_[vehicle.id] = log_.vehicles.size();
    log_.vehicles.push_back(summary);

    it = pending_spawns_.erase(it);
  }
}

void Simulation::apply_controls_and_integrate() {
  const double tick_end = now_ + kDt;
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    VehicleState& vehicle = vehicles_[i];
    prev_positions_[i] = vehicle.p;

    if (vehicle.mode == VehicleMode::Planned && tracking_ == TrackingModel::Exact) {
      const CubicTrajectory& traj = vehicle.plan->traj;
      const CubicTrajectory::Sample s = traj.eval_clamped(tick_end);
      vehicle.p = std::max(vehicle.p, vehicle.plan_origin_s + s.p);
      vehicle.v = s.v;
      vehicle.u = s.u;
    } else if (vehicle.mode == VehicleMode::Planned) {
      const CubicTrajectory& traj = vehicle.plan->traj;
      const CubicTrajectory::Sample ref = traj.eval_clamped(now_);
      const double u_cmd =
          ref.u + kTrackKp * (vehicle.plan_origin_s + ref.p - vehicle.p) +
          kTrackKv * (ref.v - vehicle.v);
      vehicle.u_actuated += (kDt / kLagTau) * (u_cmd - vehicle.u_actuated);
      vehicle.u = std::clamp(vehicle.u_actuated, config_.limits.u_min,
                             config_.limits.u_max);
      vehicle.v = std::max(0.0, vehicle.v + vehicle.u * kDt);
      vehicle.p += vehicle.v * kDt;
    } else {
      vehicle.u = baseline_accel(vehicle);
      vehicle.v = std::max(0.0, vehicle.v + vehicle.u * kDt);
      vehicle.p += vehicle.v * kDt;
    }

    if (tracking_ == TrackingModel::Lagged) {
      vehicle.v = std::max(0.0, vehicle.v + kSpeedNoise * std::sqrt(kDt) * gauss_(rng_));
    }
    vehicle.route_position += vehicle.p - prev_positions_[i];
  }
}

void Simulation::handle_zone_exits() {
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    VehicleState& vehicle = vehicles_[i];
    if (vehicle.mode == VehicleMode::Planned) {
      const CubicTrajectory& traj = vehicle.plan->traj;
      const double target = vehicle.plan_origin_s + traj.path_length();
      double t_actual = -1.0;
      if (tracking_ == TrackingModel::Exact) {
        if (now_ >= traj.tf() - kTol)
          t_actual = traj.tf();
      } else if (vehicle.p >= target - kTol) {
        const double prev = prev_positions_[i];
        t_actual = vehicle.p > prev + kTol
                       ? now_ - kDt + kDt * (target - prev) / (vehicle.p - prev)
                       : now_;
      }
      if (t_actual >= 0.0) {
        auto it = open_plan_events_.find(vehicle.id);
        if (it != open_plan_events_.end()) {
          log_.plans[it->second].tf_actual = t_actual;
          open_plan_events_.erase(it);
        }
        vehicle.mode = VehicleMode::Baseline;
        vehicle.plan.reset();
        vehicle.replans = 0;
        vehicle.u_actuated = vehicle.u;
      }
    } else if (vehicle.mode == VehicleMode::Degraded) {
      const PathConfig& pc = path_config(vehicle.path_id);
      if (vehicle.p >= pc.path.cz_end - kTol) {
        const double prev = prev_positions_[i];
        const double t_actual =
            vehicle.p > prev + kTol
                ? now_ - kDt + kDt * (pc.path.cz_end - prev) / (vehicle.p - prev)
                : now_;
        auto it = open_plan_events_.find(vehicle.id);
        if (it != open_plan_events_.end()) {
          log_.plans[it->second].tf_actual = t_actual;
          open_plan_events_.erase(it);
        }
        vehicle.mode = VehicleMode::Baseline;
        vehicle.replans = 0;
      }
    }
  }
}

void Simulation::handle_path_transitions() {
  for (std::size_t i = 0; i < vehicles_.size();) {
    VehicleState& vehicle = vehicles_[i];
    const PathConfig* pc = &path_config(vehicle.path_id);
    bool despawned = false;
    while (vehicle.p >= pc->path.length() - kTol) {
      const PathConfig* nxt = next_path(*pc);
      if (!nxt) {
        VehicleSummary& summary = log_.vehicles[summary_index_.at(vehicle.id)];
        summary.exit_time = now_;
        summary.stops = vehicle.stop_count;
        ++log_.exited;
        vehicles_.erase(vehicles_.begin() + static_cast<long>(i));
        prev_positions_.erase(prev_positions_.begin() + static_cast<long>(i));
        despawned = true;
        break;
      }
      vehicle.p -= pc->path.length();
      prev_positions_[i] -= pc->path.length();
      vehicle.path_id = nxt->path.id;
      pc = nxt;
    }
    if (!despawned)
      ++i;
  }
}

void Simulation::update_stop_queues() {
  if (mode_ != RunMode::Baseline)
    return;
  struct Arrival {
    double t_cross;
    int vehicle_id;
    StopState* stop;
  };
  std::vector<Arrival> arrivals;

  for (auto& [stop_id, st] : stops_) {
    for (const StopApproach& ap : st.config->approaches) {
      for (std::size_t i = 0; i < vehicles_.size(); ++i) {
        const VehicleState& vehicle = vehicles_[i];
        if (vehicle.path_id != ap.path_id)
          continue;
        const double prev = prev_positions_[i];
        if (prev < ap.enqueue_s && vehicle.p >= ap.enqueue_s) {
          const double frac =
              vehicle.p > prev ? (ap.enqueue_s - prev) / (vehicle.p - prev) : 1.0;
          arrivals.push_back(Arrival{now_ - kDt + frac * kDt, vehicle.id, &st});
        }
      }
    }
  }
  std::sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) {
    return a.t_cross != b.t_cross ? a.t_cross < b.t_cross
                                  : a.vehicle_id < b.vehicle_id;
  });
  for (const Arrival& arrival : arrivals)
    arrival.stop->queue.enqueue(arrival.vehicle_id);

  for (auto& [stop_id, st] : stops_) {
    // Forget released vehicles once they clear the merging zone (or the path).
    for (auto it = st.released.begin(); it != st.released.end();) {
      const VehicleState* vehicle = nullptr;
      for (const VehicleState& w : vehicles_)
        if (w.id == *it)
          vehicle = &w;
      const StopApproach* ap = nullptr;
      if (vehicle) {
        for (const StopApproach& candidate : st.config->approaches)
          if (candidate.path_id == vehicle->path_id)
            ap = &candidate;
      }
      if (vehicle && ap && vehicle->p <= ap->zone_end_s)
        ++it;
      else
        it = st.released.erase(it);
    }

    bool zone_occupied = !st.released.empty();
    for (const StopApproach& ap : st.config->approaches) {
      for (const VehicleState& vehicle : vehicles_) {
        if (vehicle.path_id == ap.path_id && vehicle.p > ap.line_s &&
            vehicle.p <= ap.zone_end_s)
          zone_occupied = true;
      }
    }

    if (!st.queue.empty()) {
      const int front = st.queue.front();
      const VehicleState* vehicle = nullptr;
      for (const VehicleState& w : vehicles_)
        if (w.id == front)
          vehicle = &w;
      const StopApproach* ap = nullptr;
      if (vehicle) {
        for (const StopApproach& candidate : st.config->approaches)
          if (candidate.path_id == vehicle->path_id)
            ap = &candidate;
      }
      if (vehicle && ap) {
        // A stop only counts when made at the line; a vehicle halted in
        // traffic short of it must not be waved through.
        const bool at_line = ap->line_s - vehicle->p <= 0.25;
        const double clock_speed = at_line ? vehicle->v : 1.0;
        const int released = st.queue.step(zone_occupied, clock_speed, now_);
        if (released >= 0)
          st.released.push_back(released);
      }
    }
  }
}

void Simulation::handle_zone_entries(double tick_start, double tick_end) {
  if (mode_ != RunMode::Optimal)
    return;
  struct Crossing {
    double t_cross;
    int vehicle_id;
    double origin_s;
  };
  std::vector<Crossing> crossings;

  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    const VehicleState& vehicle = vehicles_[i];
    const PathConfig& pc = path_config(vehicle.path_id);
    if (vehicle.mode == VehicleMode::Baseline) {
      const double prev = prev_positions_[i];
      if (prev < pc.path.cz_start && vehicle.p >= pc.path.cz_start &&
          vehicle.p > prev) {
        const double frac = (pc.path.cz_start - prev) / (vehicle.p - prev);
        crossings.push_back(Crossing{tick_start + frac * (tick_end - tick_start),
                                     vehicle.id, pc.path.cz_start});
      }
    } else if (vehicle.mode == VehicleMode::Degraded &&
               now_ >= vehicle.next_replan_time - kTol) {
      crossings.push_back(Crossing{tick_end, vehicle.id, vehicle.p});
    }
  }

  std::sort(crossings.begin(), crossings.end(), [](const Crossing& a, const Crossing& b) {
    return a.t_cross != b.t_cross ? a.t_cross < b.t_cross
                                  : a.vehicle_id < b.vehicle_id;
  });
  for (const Crossing& crossing : crossings) {
    for (VehicleState& vehicle : vehicles_) {
      if (vehicle.id == crossing.vehicle_id) {
        coordinator_.purge_exited(crossing.t_cross);
        attempt_plan(vehicle, crossing.t_cross, vehicle.v, crossing.origin_s);
        break;
      }
    }
  }
}

void Simulation::attempt_plan(VehicleState& vehicle, double t_cross, double v_cross,
                              double origin_s) {
  const PathConfig& pc = path_config(vehicle.path_id);
  const double remaining = pc.path.cz_end - origin_s;
  if (remaining < kMinReplanDistance) {
    // Too little zone left to commit to; ride out the zone in degraded mode.
    vehicle.next_replan_time = std::numeric_limits<double>::infinity();
    return;
  }

  // An uncoordinated vehicle ahead inside the zone makes any committed cubic
  // unsafe (the coordinator knows nothing about it); stay on car-following.
  for (const VehicleState& other : vehicles_) {
    if (other.id != vehicle.id && other.path_id == vehicle.path_id &&
        other.p > vehicle.p && other.p <= pc.path.cz_end &&
        other.mode != VehicleMode::Planned) {
      if (vehicle.mode != VehicleMode::Degraded) {
        vehicle.mode = VehicleMode::Degraded;
        ++vehicle.replans;
        PlanningEvent ev;
        ev.vehicle_id = vehicle.id;
        ev.path_id = vehicle.path_id;
        ev.t_entry = t_cross;
        ev.v_entry = v_cross;
        ev.zone_length = remaining;
        ev.t_lb = -1.0;
        ev.t_ub = -1.0;
        ev.tf_planned = -1.0;
        ev.degraded = true;
        open_plan_events_[vehicle.id] = log_.plans.size();
        log_.plans.push_back(ev);
      }
      vehicle.next_replan_time = t_cross + kReplanPeriod;
      return;
    }
  }

  const double v0 = std::clamp(v_cross, config_.limits.v_min, config_.limits.v_max);
  const ExitTimeBounds bounds = exit_time_bounds(v0, remaining, config_.limits);

  PlanningEvent ev;
  ev.vehicle_id = vehicle.id;
  ev.path_id = vehicle.path_id;
  ev.t_entry = t_cross;
  ev.v_entry = v0;
  ev.zone_length = remaining;
  ev.t_lb = t_cross + bounds.t_lb;
  ev.t_ub = t_cross + bounds.t_ub;
  ev.replans = vehicle.replans;

  const PlanningContext context = coordinator_.register_entry(
      vehicle.id, vehicle.path_id, t_cross, v0, config_.limits, origin_s);
  try {
    const PlannedTrajectory planned = plan(context, config_.limits, config_.safety);
    coordinator_.store(planned, context.revision);

    auto it = open_plan_events_.find(vehicle.id);
    if (it != open_plan_events_.end())
      log_.plans[it->second].superseded = true; // recovered from degraded mode

    vehicle.mode = VehicleMode::Planned;
    vehicle.plan = planned;
    vehicle.plan_origin_s = origin_s;
    vehicle.u_actuated = vehicle.u;
    ev.tf_planned = planned.exit_time();
    if (tracking_ == TrackingModel::Exact) {
      const CubicTrajectory::Sample s = planned.traj.eval_clamped(now_);
      vehicle.p = std::max(vehicle.p, origin_s + s.p);
      vehicle.v = s.v;
      vehicle.u = s.u;
    }
    open_plan_events_[vehicle.id] = log_.plans.size();
    log_.plans.push_back(ev);
  } catch (const NoFeasibleExitTime&) {
    ++vehicle.replans;
    if (vehicle.mode != VehicleMode::Degraded) {
      vehicle.mode = VehicleMode::Degraded;
      ev.tf_planned = -1.0;
      ev.degraded = true;
      open_plan_events_[vehicle.id] = log_.plans.size();
      log_.plans.push_back(ev);
    } else {
      auto it = open_plan_events_.find(vehicle.id);
      if (it != open_plan_events_.end())
        log_.plans[it->second].replans = vehicle.replans;
    }
    vehicle.next_replan_time = t_cross + kReplanPeriod;
  }
}

void Simulation::monitor_safety() {
  const double lam = config_.safety.vehicle_length;

  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    for (std::size_t j = i + 1; j < vehicles_.size(); ++j) {
      const VehicleState& a = vehicles_[i];
      const VehicleState& b = vehicles_[j];
      if (a.path_id != b.path_id)
        continue;
      const VehicleState& leader = a.p >= b.p ? a : b;
      const VehicleState& follower = a.p >= b.p ? b : a;
      const std::pair<int, int> key{std::min(a.id, b.id), std::max(a.id, b.id)};

      const double gap = leader.p - follower.p - lam;
      if (gap < -kCollisionTol) {
        if (!contains(colliding_pairs_, key)) {
          colliding_pairs_.push_back(key);
          ++log_.physical_collisions;
        }
      } else {
        remove_value(colliding_pairs_, key);
      }

      if (leader.mode == VehicleMode::Planned && follower.mode == VehicleMode::Planned) {
        const double slack =
            gap - config_.safety.standstill - config_.safety.headway * follower.v;
        log_.min_rear_end_slack = std::min(log_.min_rear_end_slack, slack);
        if (slack < -kCollisionTol) {
          if (!contains(slack_violating_pairs_, key)) {
            slack_violating_pairs_.push_back(key);
            ++log_.rear_end_violations;
          }
        } else {
          remove_value(slack_violating_pairs_, key);
        }
      }
    }
  }

  for (const ConflictPoint& cp : net_.conflicts()) {
    bool occupied_a = false;
    bool occupied_b = false;
    for (const VehicleState& vehicle : vehicles_) {
      if (vehicle.path_id == cp.path_a && vehicle.p >= cp.s_a &&
          vehicle.p <= cp.s_a + lam)
        occupied_a = true;
      if (vehicle.path_id == cp.path_b && vehicle.p >= cp.s_b &&
          vehicle.p <= cp.s_b + lam)
        occupied_b = true;
    }
    if (occupied_a && occupied_b) {
      if (!contains(occupied_conflicts_, cp.id)) {
        occupied_conflicts_.push_back(cp.id);
        ++log_.lateral_violations;
      }
    } else {
      remove_value(occupied_conflicts_, cp.id);
    }
  }
}

void Simulation::record_tick() {
  for (VehicleState& vehicle : vehicles_) {
    const PathConfig& pc = path_config(vehicle.path_id);
    const bool in_zone =
        vehicle.p >= pc.path.cz_start && vehicle.p <= pc.path.cz_end;
    log_.ticks.push_back(TickRecord{now_, vehicle.id, path_index(vehicle.path_id),
                                    vehicle.p, vehicle.route_position, vehicle.v,
                                    vehicle.u, vehicle.mode, in_zone});

    // Full-stop detection with hysteresis.
    if (vehicle.v < StopQueue::kStopSpeed) {
      if (vehicle.slow_since < 0.0)
        vehicle.slow_since = now_;
      if (!vehicle.in_stop_event &&
          now_ - vehicle.slow_since >= StopQueue::kStopHold - kTol) {
        vehicle.in_stop_event = true;
        ++vehicle.stop_count;
      }
    } else if (vehicle.v > kStopResetSpeed) {
      vehicle.slow_since = -1.0;
      vehicle.in_stop_event = false;
    }

    VehicleSummary& summary = log_.vehicles[summary_index_.at(vehicle.id)];
    summary.stops = vehicle.stop_count;
    summary.min_speed = std::min(summary.min_speed, vehicle.v);
    summary.speed_sum += vehicle.v;
    ++summary.speed_samples;
    if (in_zone) {
      summary.zone_min_speed = std::min(summary.zone_min_speed, vehicle.v);
      summary.zone_speed_sum += vehicle.v;
      ++summary.zone_speed_samples;
    }
  }
}

void Simulation::step() {
  const double tick_start = now_;
  const double tick_end = now_ + kDt;

  process_spawns();
  apply_controls_and_integrate();
  now_ = tick_end;
  ++tick_index_;

  handle_zone_exits();
  handle_path_transitions();
  update_stop_queues();
  handle_zone_entries(tick_start, tick_end);
  monitor_safety();
  record_tick();

  if (log_.spawned != log_.exited + static_cast<int>(vehicles_.size()))
    throw std::logic_error("engine: vehicle conservation violated");
}

SimLog Simulation::run(double duration) {
  log_.duration = duration;
  const long ticks = std::lround(duration / kDt);
  for (long i = 0; i < ticks; ++i)
    step();
  return std::move(log_);
}

SimLog run_simulation(const ScenarioConfig& config, RunMode mode,
                      TrackingModel tracking, std::uint64_t seed, double duration) {
  Simulation sim(config, mode, tracking, seed);
  return sim.run(duration);
}

Metrics compute_metrics(const SimLog& log) {
  if (log.ticks.empty())
    throw std::invalid_argument("compute_metrics: empty log");

  Metrics m;
  m.rear_end_violations = log.rear_end_violations;
  m.lateral_violations = log.lateral_violations;
  m.physical_collisions = log.physical_collisions;
  m.min_rear_end_slack = log.min_rear_end_slack;
  m.spawned = log.spawned;
  m.exited = log.exited;

  double sum_all = 0.0, sum_zone = 0.0;
  long n_all = 0, n_zone = 0;
  double min_all = std::numeric_limits<double>::infinity();
  double min_zone = std::numeric_limits<double>::infinity();
  for (const TickRecord& rec : log.ticks) {
    sum_all += rec.v;
    ++n_all;
    min_all = std::min(min_all, rec.v);
    if (rec.in_zone) {
      sum_zone += rec.v;
      ++n_zone;
      min_zone = std::min(min_zone, rec.v);
    }
  }
  m.v_avg_all = sum_all / static_cast<double>(n_all);
  m.v_min_all = min_all;
  m.v_avg_zone = n_zone > 0 ? sum_zone / static_cast<double>(n_zone) : 0.0;
  m.v_min_zone = n_zone > 0 ? min_zone : 0.0;

  double sq_err_sum = 0.0;
  long n_err = 0;
  for (const PlanningEvent& ev : log.plans) {
    if (ev.degraded) {
      ++m.degraded_count;
      continue;
    }
    ++m.planned_count;
    if (ev.superseded || ev.tf_actual < 0.0)
      continue;
    const double horizon = ev.tf_planned - ev.t_entry;
    const double err_pct = 100.0 * (ev.tf_actual - ev.tf_planned) / horizon;
    sq_err_sum += err_pct * err_pct;
    ++n_err;
  }
  m.rmse_exit_time_pct =
      n_err > 0 ? std::sqrt(sq_err_sum / static_cast<double>(n_err)) : 0.0;

  bool any_ego = false;
  EgoMetrics ego;
  double ego_speed_sum = 0.0;
  long ego_samples = 0;
  double ego_min = std::numeric_limits<double>::infinity();
  double travel_sum = 0.0;
  for (const VehicleSummary& vs : log.vehicles) {
    if (!vs.ego)
      continue;
    any_ego = true;
    ++ego.vehicle_count;
    ego_speed_sum += vs.speed_sum;
    ego_samples += vs.speed_samples;
    ego_min = std::min(ego_min, vs.min_speed);
    if (ego.vehicle_count == 1) {
      ego.stops_min = vs.stops;
      ego.stops_max = vs.stops;
    } else {
      ego.stops_min = std::min(ego.stops_min, vs.stops);
      ego.stops_max = std::max(ego.stops_max, vs.stops);
    }
    if (vs.exit_time >= 0.0) {
      travel_sum += vs.exit_time - vs.spawn_time;
      ++ego.completed;
    }
  }
  if (any_ego) {
    ego.avg_speed = ego_samples > 0 ? ego_speed_sum / static_cast<double>(ego_samples)
                                    : 0.0;
    ego.min_speed = std::isfinite(ego_min) ? ego_min : 0.0;
    ego.avg_travel_time =
        ego.completed > 0 ? travel_sum / static_cast<double>(ego.completed) : 0.0;
    m.ego = ego;
  }
  return m;
}

} // namespace cavsim
