#include "cavsim/safety.hpp"

#include <algorithm>
#include <cmath>

namespace cavsim {

namespace {

constexpr double kSlackTol = 1e-9; // boundary slack on all constraint checks [m]

// Real roots of A t^2 + B t + C = 0, written to out; returns the root count.
// Uses the cancellation-free form q = -(B + sign(B) sqrt(disc)) / 2.
int quadratic_roots(double A, double B, double C, double out[2]) {
  if (A == 0.0) {
    if (B == 0.0)
      return 0;
    out[0] = -C / B;
    return 1;
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0)
    return 0;
  const double sq = std::sqrt(disc);
  const double q = B >= 0.0 ? -0.5 * (B + sq) : -0.5 * (B - sq);
  if (q == 0.0) {
    out[0] = 0.0;
    return 1;
  }
  out[0] = q / A;
  out[1] = C / q;
  return 2;
}

} // namespace

void SafetyParams::validate() const {
  if (!(standstill > 0.0) || !(headway > 0.0) || !(vehicle_length > 0.0))
    throw std::invalid_argument("SafetyParams: all fields must be positive");
}

double safe_distance(const SafetyParams& params, double v) {
  return params.standstill + params.headway * v;
}

CubicPoly position_poly(const CubicTrajectory& traj, double frame_origin, double offset) {
  // p(sigma) = a (sigma + h)^3 + b (sigma + h)^2 + c (sigma + h) + d
  const double h = frame_origin - traj.t0();
  const double a = traj.a(), b = traj.b(), c = traj.c(), d = traj.d();
  return CubicPoly{a,
                   3.0 * a * h + b,
                   (3.0 * a * h + 2.0 * b) * h + c,
                   ((a * h + b) * h + c) * h + d + offset};
}

CubicPoly speed_poly(const CubicTrajectory& traj, double frame_origin) {
  const CubicPoly p = position_poly(traj, frame_origin);
  return CubicPoly{0.0, 3.0 * p.c3, 2.0 * p.c2, p.c1};
}

Extremum extremum_on_interval(const CubicPoly& poly, double t1, double t2) {
  if (t1 > t2)
    std::swap(t1, t2);

  Extremum best{t1, poly.eval(t1)};
  auto consider = [&](double t) {
    const double v = poly.eval(t);
    if (v > best.value) {
      best = Extremum{t, v};
    }
  };
  consider(t2);

  double roots[2];
  const int n = quadratic_roots(3.0 * poly.c3, 2.0 * poly.c2, poly.c1, roots);
  for (int i = 0; i < n; ++i) {
    if (roots[i] > t1 && roots[i] < t2)
      consider(roots[i]);
  }
  return best;
}

bool rear_end_satisfied(const CubicTrajectory& follower,
                        const CubicTrajectory& leader,
                        double leader_offset,
                        const SafetyParams& params,
                        double t1, double t2) {
  if (t2 < t1)
    return true;
  constexpr double kCover = 1e-9;
  if (follower.t0() > t1 + kCover || follower.tf() < t2 - kCover ||
      leader.t0() > t1 + kCover || leader.tf() < t2 - kCover)
    throw std::invalid_argument("rear_end_satisfied: window outside trajectory horizons");

  // Violation slack: delta(v_i) + p_i + lambda - p_k, a cubic in sigma = t - t1.
  CubicPoly slack = position_poly(follower, t1) - position_poly(leader, t1, leader_offset);
  const CubicPoly v = speed_poly(follower, t1);
  slack.c2 += params.headway * v.c2;
  slack.c1 += params.headway * v.c1;
  slack.c0 += params.headway * v.c0 + params.standstill + params.vehicle_length;

  return extremum_on_interval(slack, 0.0, t2 - t1).value <= kSlackTol;
}

namespace {

// One side of the lateral constraint: the vehicle keeps delta(v) behind its
// conflict position for every t in [traj.t0, t_other] clamped to its horizon.
bool stays_behind_until(const CubicTrajectory& traj, double p_n,
                        const SafetyParams& params, double t_other) {
  const double t_end = std::min(t_other, traj.tf());
  if (t_end < traj.t0())
    return true; // no shared occupancy window

  CubicPoly slack = position_poly(traj, traj.t0());
  const CubicPoly v = speed_poly(traj, traj.t0());
  slack.c2 += params.headway * v.c2;
  slack.c1 += params.headway * v.c1;
  slack.c0 += params.headway * v.c0 + params.standstill - p_n;

  return extremum_on_interval(slack, 0.0, t_end - traj.t0()).value <= kSlackTol;
}

} // namespace

bool lateral_satisfied(const CubicTrajectory& traj_i, double p_i_n,
                       const CubicTrajectory& traj_j, double p_j_n,
                       const SafetyParams& params) {
  if (p_i_n < 0.0 || p_i_n > traj_i.path_length() ||
      p_j_n < 0.0 || p_j_n > traj_j.path_length())
    throw std::invalid_argument("lateral_satisfied: conflict point not on both paths");

  const double t_j_n = traj_j.time_at_position(p_j_n);
  if (stays_behind_until(traj_i, p_i_n, params, t_j_n))
    return true;
  const double t_i_n = traj_i.time_at_position(p_i_n);
  return stays_behind_until(traj_j, p_j_n, params, t_i_n);
}

} // namespace cavsim
