#pragma once

#include "cavsim/trajectory.hpp"

namespace cavsim {

/// Parameters of the speed-dependent safe following distance
/// delta(v) = standstill + headway * v.
struct SafetyParams {
  double standstill = 0.07;     ///< gamma, gap kept at zero speed [m]
  double headway = 1.0;         ///< rho, minimum time headway [s]
  double vehicle_length = 0.07; ///< lambda [m]

  void validate() const;
};

/// Minimum gap a vehicle must keep to its predecessor at speed v.
double safe_distance(const SafetyParams& params, double v);

/// c3 t^3 + c2 t^2 + c1 t + c0. Constraint slacks assembled from trajectory
/// pairs are cubics of this form, so their extrema are exact.
struct CubicPoly {
  double c3 = 0.0, c2 = 0.0, c1 = 0.0, c0 = 0.0;

  double eval(double t) const { return ((c3 * t + c2) * t + c1) * t + c0; }

  CubicPoly operator+(const CubicPoly& o) const {
    return {c3 + o.c3, c2 + o.c2, c1 + o.c1, c0 + o.c0};
  }
  CubicPoly operator-(const CubicPoly& o) const {
    return {c3 - o.c3, c2 - o.c2, c1 - o.c1, c0 - o.c0};
  }
};

/// Position of `traj` as a polynomial of sigma = t - frame_origin, with
/// `offset` added (places the trajectory in a shared arc-length frame).
CubicPoly position_poly(const CubicTrajectory& traj, double frame_origin, double offset = 0.0);

/// Speed of `traj` as a polynomial of sigma = t - frame_origin.
CubicPoly speed_poly(const CubicTrajectory& traj, double frame_origin);

struct Extremum {
  double t = 0.0;     ///< location of the maximum (earliest, on ties)
  double value = 0.0; ///< maximum value on the closed interval
};

/// Global maximum of a cubic over [t1, t2], found by evaluating the endpoints
/// and the real roots of the quadratic derivative that fall inside.
Extremum extremum_on_interval(const CubicPoly& poly, double t1, double t2);

/// Rear-end constraint between a follower and the leader physically ahead of
/// it on the same lane, checked over the absolute-time window [t1, t2]:
///
///   p_leader(t) - lambda - p_follower(t) >= standstill + headway * v_follower(t)
///
/// must hold throughout. `leader_offset` expresses the leader's position in
/// the follower's arc-length frame (it is added to the leader's positions).
/// An empty window (t2 < t1) is satisfied. Throws std::invalid_argument when
/// either trajectory does not cover the window.
bool rear_end_satisfied(const CubicTrajectory& follower,
                        const CubicTrajectory& leader,
                        double leader_offset,
                        const SafetyParams& params,
                        double t1, double t2);

/// Lateral constraint at a conflict point shared by the paths of i and j.
/// `p_i_n` / `p_j_n` locate the point in each trajectory's own arc-length
/// frame. Satisfied when either vehicle keeps the safe distance behind the
/// point until the other has crossed it:
///
///   (a)  p_i_n - p_i(t) >= delta_i(t)  for all t in [t_i0, t_j_n], or
///   (b)  p_j_n - p_j(t) >= delta_j(t)  for all t in [t_j0, t_i_n],
///
/// where t_x_n is the time trajectory x crosses the point. Each window is
/// clamped to the trajectory's horizon (a vehicle that has left the zone no
/// longer constrains), and an empty window satisfies its branch.
/// Throws std::invalid_argument when a conflict position lies off a path.
bool lateral_satisfied(const CubicTrajectory& traj_i, double p_i_n,
                       const CubicTrajectory& traj_j, double p_j_n,
                       const SafetyParams& params);

} // namespace cavsim
