#pragma once

#include <stdexcept>

namespace cavsim {

/// Admissible speed and control ranges for a vehicle inside a control zone.
struct Limits {
  double v_min = 0.15;  ///< minimum speed [m/s], strictly positive
  double v_max = 0.5;   ///< maximum speed [m/s]
  double u_min = -0.45; ///< minimum control input [m/s^2], negative
  double u_max = 0.45;  ///< maximum control input [m/s^2], positive

  /// Throws std::invalid_argument unless 0 < v_min <= v_max and u_min < 0 < u_max.
  void validate() const;

  bool contains_speed(double v) const { return v >= v_min && v <= v_max; }
};

/// Feasible range of control-zone exit times for a given entry state.
///
/// Every exit time in [t_lb, t_ub] produces a cubic that keeps the control
/// input and speed admissible over the whole horizon; times outside the
/// interval violate at least one of the four range constraints.
struct ExitTimeBounds {
  double t_lb = 0.0; ///< earliest feasible exit time [s], relative to entry
  double t_ub = 0.0; ///< latest feasible exit time [s], relative to entry
};

/// Energy-optimal unconstrained trajectory through a control zone.
///
/// Position is a cubic polynomial of local time tau = t - t0:
///   p(tau) = a tau^3 + b tau^2 + c tau + d
///   v(tau) = 3 a tau^2 + 2 b tau + c
///   u(tau) = 6 a tau + 2 b
/// The boundary conditions p(0) = 0, v(0) = v0, p(tf) = S, u(tf) = 0 pin all
/// four coefficients once the exit time tf is chosen: d = 0, c = v0,
/// b = 3 (S - v0 tf) / (2 tf^2), a = -b / (3 tf).
///
/// Since u is linear and vanishes at tf, u attains its extreme value at entry;
/// since v is then monotone, v attains its extreme at tf. Range feasibility of
/// the whole trajectory therefore reduces to checks at the two endpoints.
class CubicTrajectory {
public:
  /// Builds the trajectory from the entry speed v0 [m/s], the distance to
  /// cover S [m], and the exit time tf [s] measured from entry (t0 = 0).
  /// Throws std::invalid_argument for non-positive inputs.
  CubicTrajectory(double v0, double S, double tf);

  /// Same trajectory re-anchored so that entry happens at absolute time t0.
  CubicTrajectory shifted(double t0) const;

  double position(double t) const; ///< distance travelled since entry [m]
  double speed(double t) const;    ///< [m/s]
  double accel(double t) const;    ///< [m/s^2]

  struct Sample {
    double p, v, u;
  };

  /// Evaluates (p, v, u) at absolute time t.
  /// Throws std::out_of_range for t outside [t0, tf].
  Sample eval(double t) const;

  /// Like eval, but clamps t into the horizon instead of throwing.
  Sample eval_clamped(double t) const;

  /// Inverse of position(): the unique t in [t0, tf] with position(t) = p.
  /// Valid whenever speed stays positive on the horizon, which feasible exit
  /// times guarantee. Solved by Newton iteration safeguarded by bisection on
  /// the monotone bracket; the returned time reproduces p to below 1e-9 m.
  /// Throws std::out_of_range for p outside [0, S].
  double time_at_position(double p) const;

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double d() const { return d_; }
  double t0() const { return t0_; }
  double tf() const { return tf_; }
  double duration() const { return tf_ - t0_; }
  double path_length() const { return length_; }
  double entry_speed() const { return v0_; }

private:
  CubicTrajectory() = default;

  double a_ = 0.0, b_ = 0.0, c_ = 0.0, d_ = 0.0;
  double t0_ = 0.0, tf_ = 0.0;
  double length_ = 0.0;
  double v0_ = 0.0;
};

/// Feasible exit-time interval for entry speed v0 [m/s] and zone length S [m].
///
/// The lower bound is the larger of the time at which u(t0) = u_max and the
/// time at which v(tf) = v_max: both u(t0) and v(tf) decrease as the exit time
/// grows, so the trajectory is feasible only once both candidates are cleared.
/// The upper bound is the time at which v(tf) = v_min, tightened by the first
/// root of u(t0) = u_min when 9 v0^2 + 12 S u_min >= 0 (for shorter exit times
/// the braking demand at entry never reaches u_min, so only v_min binds).
///
/// Throws std::domain_error when v0 lies outside [v_min, v_max] and
/// std::invalid_argument for non-positive v0 or S.
ExitTimeBounds exit_time_bounds(double v0, double S, const Limits& limits);

/// True iff u_min <= u(t0) <= u_max and v_min <= v(tf) <= v_max, the endpoint
/// conditions that are necessary and sufficient for the whole horizon.
/// Boundary equality counts as feasible (closed interval, 1e-9 tolerance).
bool is_state_control_feasible(const CubicTrajectory& traj, const Limits& limits);

} // namespace cavsim
