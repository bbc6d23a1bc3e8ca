#include "cavsim/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cavsim {

namespace {
constexpr double kTimeTol = 1e-9;     // slack on horizon membership checks [s]
constexpr double kRangeTol = 1e-9;    // slack on speed/control range checks
constexpr double kInvertTol = 1e-12;  // position residual target for inversion [m]
} // namespace

void Limits::validate() const {
  if (!(v_min > 0.0) || !(v_min <= v_max))
    throw std::invalid_argument("Limits: need 0 < v_min <= v_max");
  if (!(u_min < 0.0) || !(u_max > 0.0))
    throw std::invalid_argument("Limits: need u_min < 0 < u_max");
}

CubicTrajectory::CubicTrajectory(double v0, double S, double tf) {
  if (!(tf > 0.0) || !(S > 0.0) || !(v0 > 0.0))
    throw std::invalid_argument("CubicTrajectory: v0, S, tf must be positive");
  b_ = 3.0 * (S - v0 * tf) / (2.0 * tf * tf);
  a_ = -b_ / (3.0 * tf);
  c_ = v0;
  d_ = 0.0;
  t0_ = 0.0;
  tf_ = tf;
  length_ = S;
  v0_ = v0;
}

CubicTrajectory CubicTrajectory::shifted(double t0) const {
  CubicTrajectory out = *this;
  out.tf_ = t0 + (tf_ - t0_);
  out.t0_ = t0;
  return out;
}

double CubicTrajectory::position(double t) const {
  const double tau = t - t0_;
  return ((a_ * tau + b_) * tau + c_) * tau + d_;
}

double CubicTrajectory::speed(double t) const {
  const double tau = t - t0_;
  return (3.0 * a_ * tau + 2.0 * b_) * tau + c_;
}

double CubicTrajectory::accel(double t) const {
  const double tau = t - t0_;
  return 6.0 * a_ * tau + 2.0 * b_;
}

CubicTrajectory::Sample CubicTrajectory::eval(double t) const {
  if (t < t0_ - kTimeTol || t > tf_ + kTimeTol)
    throw std::out_of_range("CubicTrajectory::eval: t outside [t0, tf]");
  return eval_clamped(t);
}

CubicTrajectory::Sample CubicTrajectory::eval_clamped(double t) const {
  const double tc = std::clamp(t, t0_, tf_);
  return Sample{position(tc), speed(tc), accel(tc)};
}

double CubicTrajectory::time_at_position(double p) const {
  if (p < -kInvertTol || p > length_ + 1e-9)
    throw std::out_of_range("CubicTrajectory::time_at_position: p outside [0, S]");
  p = std::clamp(p, 0.0, length_);

  double lo = 0.0;
  double hi = tf_ - t0_;
  // Work in local time; position is strictly increasing on [0, hi].
  double t = hi > 0.0 ? hi * (p / length_) : 0.0;
  const double scale = std::max(1.0, length_);
  for (int iter = 0; iter < 100; ++iter) {
    const double f = ((a_ * t + b_) * t + c_) * t + d_ - p;
    if (std::abs(f) <= kInvertTol * scale)
      break;
    if (f < 0.0)
      lo = t;
    else
      hi = t;
    const double fp = (3.0 * a_ * t + 2.0 * b_) * t + c_;
    double next = fp > 0.0 ? t - f / fp : lo;
    if (!(next > lo) || !(next < hi))
      next = 0.5 * (lo + hi); // Newton left the bracket; bisect instead
    if (next == t)
      break;
    t = next;
  }
  return t0_ + t;
}

ExitTimeBounds exit_time_bounds(double v0, double S, const Limits& limits) {
  limits.validate();
  if (!(v0 > 0.0) || !(S > 0.0))
    throw std::invalid_argument("exit_time_bounds: v0 and S must be positive");
  if (!limits.contains_speed(v0))
    throw std::domain_error("exit_time_bounds: entry speed outside [v_min, v_max]");

  // u(t0) = u_max: positive root of u_max tf^2 + 3 v0 tf - 3 S = 0.
  const double t_umax =
      (std::sqrt(9.0 * v0 * v0 + 12.0 * S * limits.u_max) - 3.0 * v0) /
      (2.0 * limits.u_max);
  // v(tf) = v_max.
  const double t_vmax = 3.0 * S / (v0 + 2.0 * limits.v_max);
  // v(tf) = v_min.
  const double t_vmin = 3.0 * S / (v0 + 2.0 * limits.v_min);

  ExitTimeBounds bounds;
  bounds.t_lb = std::max(t_umax, t_vmax);

  const double disc = 9.0 * v0 * v0 + 12.0 * S * limits.u_min;
  if (disc < 0.0) {
    // Entry braking never reaches u_min for any exit time; v_min alone binds.
    bounds.t_ub = t_vmin;
  } else {
    // u(t0) crosses u_min at the smaller root and stays below it until the
    // larger one, so the feasible interval reachable from t_lb ends at the
    // first crossing (or at t_vmin if that comes sooner).
    const double t_umin = (std::sqrt(disc) - 3.0 * v0) / (2.0 * limits.u_min);
    bounds.t_ub = std::min(t_umin, t_vmin);
  }
  return bounds;
}

bool is_state_control_feasible(const CubicTrajectory& traj, const Limits& limits) {
  const double u0 = traj.accel(traj.t0());
  const double vf = traj.speed(traj.tf());
  return u0 >= limits.u_min - kRangeTol && u0 <= limits.u_max + kRangeTol &&
         vf >= limits.v_min - kRangeTol && vf <= limits.v_max + kRangeTol;
}

} // namespace cavsim
