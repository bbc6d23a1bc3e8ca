/**
 * @file test_safety.cpp
 * @brief Closed-form safety predicates vs dense-sampling oracles.
 *
 * Every analytic predicate (cubic extremum on an interval, rear-end gap,
 * lateral conflict-zone separation) is cross-checked against 1 ms sampling
 * of the same definition. Disagreements are tolerated only when the sampled
 * extremum sits within the grid's interpolation error of the decision
 * boundary.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cavsim/safety.hpp"
#include "cavsim/trajectory.hpp"

using namespace cavsim;

namespace {

constexpr double kStep = 1e-3;   // oracle sampling interval [s]
constexpr double kSlackTol = 1e-9;

/// Upper bound on the error of sampling `poly` on a grid of spacing h over
/// [t1, t2]: max |f''| * h^2 / 8, with |f''| affine and so maximal at an end.
double sampling_error_bound(const CubicPoly& poly, double t1, double t2, double h) {
  const double m = std::max(std::abs(6.0 * poly.c3 * t1 + 2.0 * poly.c2),
                            std::abs(6.0 * poly.c3 * t2 + 2.0 * poly.c2));
  return m * h * h / 8.0;
}

/// Maximum of poly over [t1, t2] by dense sampling (endpoints included).
double sampled_max(const CubicPoly& poly, double t1, double t2) {
  double best = poly.eval(t1);
  for (double t = t1; t < t2; t += kStep)
    best = std::max(best, poly.eval(t));
  return std::max(best, poly.eval(t2));
}

CubicTrajectory random_trajectory(std::mt19937_64& rng, const Limits& lim,
                                  double* out_S = nullptr) {
  std::uniform_real_distribution<double> pick_v0(lim.v_min, lim.v_max);
  std::uniform_real_distribution<double> pick_S(2.0, 8.0);
  std::uniform_real_distribution<double> pick_frac(0.0, 1.0);
  const double v0 = pick_v0(rng);
  const double S = pick_S(rng);
  const ExitTimeBounds b = exit_time_bounds(v0, S, lim);
  const double tf = b.t_lb + (b.t_ub - b.t_lb) * pick_frac(rng);
  if (out_S)
    *out_S = S;
  return CubicTrajectory(v0, S, tf).shifted(pick_frac(rng) * 5.0);
}

/// Violation polynomial of the rear-end constraint in sigma = t - t1:
/// positive values mean the follower is too close.
CubicPoly rear_end_violation(const CubicTrajectory& follower,
                             const CubicTrajectory& leader,
                             double leader_offset,
                             const SafetyParams& params, double t1) {
  CubicPoly viol = position_poly(follower, t1) - position_poly(leader, t1, leader_offset);
  const CubicPoly v = speed_poly(follower, t1);
  viol.c2 += params.headway * v.c2;
  viol.c1 += params.headway * v.c1;
  viol.c0 += params.headway * v.c0 + params.standstill + params.vehicle_length;
  return viol;
}

} // namespace

TEST_SUITE("safety") {

TEST_CASE("safe_distance is affine in speed") {
  SafetyParams params;
  CHECK(safe_distance(params, 0.0) == doctest::Approx(0.07));
  CHECK(safe_distance(params, 0.3) == doctest::Approx(0.37));
  CHECK(safe_distance(params, 0.5) == doctest::Approx(0.57));
  params.headway = 0.5;
  params.standstill = 0.1;
  CHECK(safe_distance(params, 0.4) == doctest::Approx(0.3));
}

TEST_CASE("safety params validation") {
  SafetyParams params;
  CHECK_NOTHROW(params.validate());
  params.standstill = -0.01;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = SafetyParams{};
  params.headway = 0.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = SafetyParams{};
  params.vehicle_length = -1.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}

TEST_CASE("position_poly and speed_poly reproduce the trajectory") {
  std::mt19937_64 rng(3);
  const Limits lim;
  for (int i = 0; i < 50; ++i) {
    const CubicTrajectory traj = random_trajectory(rng, lim);
    const double frame = traj.t0() - 1.5;
    const double offset = 2.25;
    const CubicPoly pos = position_poly(traj, frame, offset);
    const CubicPoly vel = speed_poly(traj, frame);
    for (int k = 0; k <= 20; ++k) {
      const double t = traj.t0() + traj.duration() * k / 20.0;
      CHECK(pos.eval(t - frame) ==
            doctest::Approx(traj.position(t) + offset).epsilon(1e-10));
      CHECK(vel.eval(t - frame) == doctest::Approx(traj.speed(t)).epsilon(1e-10));
    }
  }
}

TEST_CASE("poly arithmetic") {
  const CubicPoly a{1.0, -2.0, 3.0, 0.5};
  const CubicPoly b{0.5, 1.0, -1.0, 2.0};
  const CubicPoly sum = a + b;
  const CubicPoly diff = a - b;
  for (double t : {-1.0, 0.0, 0.7, 2.3}) {
    CHECK(sum.eval(t) == doctest::Approx(a.eval(t) + b.eval(t)).epsilon(1e-12));
    CHECK(diff.eval(t) == doctest::Approx(a.eval(t) - b.eval(t)).epsilon(1e-12));
  }
}

TEST_CASE("extremum_on_interval finds the true maximum") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_real_distribution<double> width(0.1, 20.0);

  for (int i = 0; i < 500; ++i) {
    CubicPoly poly{coeff(rng), coeff(rng), coeff(rng), coeff(rng)};
    if (i % 4 == 1)
      poly.c3 = 0.0; // quadratic
    if (i % 4 == 2)
      poly.c3 = poly.c2 = 0.0; // affine
    if (i % 4 == 3)
      poly.c3 = poly.c2 = poly.c1 = 0.0; // constant
    const double t1 = coeff(rng) * 5.0;
    const double t2 = t1 + width(rng);
    const Extremum best = extremum_on_interval(poly, t1, t2);

    CHECK(best.t >= t1);
    CHECK(best.t <= t2);
    CHECK(best.value == doctest::Approx(poly.eval(best.t)).epsilon(1e-9));

    const double grid = sampled_max(poly, t1, t2);
    const double band = sampling_error_bound(poly, t1, t2, kStep) + 1e-12;
    CHECK(best.value >= grid - 1e-12); // never below any sampled value
    CHECK(best.value <= grid + band);  // never above the true maximum
  }
}

TEST_CASE("extremum_on_interval normalizes a reversed interval") {
  const CubicPoly poly{0.2, -1.0, 0.3, 4.0};
  const Extremum fwd = extremum_on_interval(poly, -2.0, 6.0);
  const Extremum rev = extremum_on_interval(poly, 6.0, -2.0);
  CHECK(fwd.t == doctest::Approx(rev.t));
  CHECK(fwd.value == doctest::Approx(rev.value));
}

TEST_CASE("rear-end: identical plans separated by the safe distance") {
  SafetyParams params;
  const CubicTrajectory follower(0.3, 5.3, 16.0);
  const CubicTrajectory leader = follower;
  // Same profile ahead by a constant offset: the gap is constant while the
  // required distance peaks with speed (monotone here, so at tf).
  const double v_peak =
      extremum_on_interval(speed_poly(follower, follower.t0()), 0.0,
                           follower.duration())
          .value;
  CHECK(v_peak == doctest::Approx(0.346875).epsilon(1e-12));
  const double tight = safe_distance(params, v_peak) + params.vehicle_length;

  CHECK(rear_end_satisfied(follower, leader, tight + 1e-6, params,
                           follower.t0(), follower.tf()));
  CHECK_FALSE(rear_end_satisfied(follower, leader, tight - 1e-3, params,
                                 follower.t0(), follower.tf()));
}

TEST_CASE("rear-end: empty window is trivially safe") {
  SafetyParams params;
  const CubicTrajectory traj(0.3, 5.3, 16.0);
  CHECK(rear_end_satisfied(traj, traj, 0.0, params, 5.0, 4.0));
}

TEST_CASE("rear-end: window outside the common horizon throws") {
  SafetyParams params;
  const CubicTrajectory follower(0.3, 5.3, 16.0);
  const CubicTrajectory leader = CubicTrajectory(0.3, 5.3, 16.0).shifted(-2.0);
  // The leader's plan ends at 14 s; asking about [0, 16] exceeds it.
  CHECK_THROWS_AS(rear_end_satisfied(follower, leader, 1.0, params, 0.0, 16.0),
                  std::invalid_argument);
  CHECK_NOTHROW(rear_end_satisfied(follower, leader, 1.0, params, 0.0, 14.0));
}

TEST_CASE("rear-end agrees with dense sampling") {
  std::mt19937_64 rng(23);
  const Limits lim;
  SafetyParams params;
  std::uniform_real_distribution<double> pick_offset(0.0, 2.0);
  int checked = 0, violated = 0;

  for (int i = 0; i < 400; ++i) {
    const CubicTrajectory follower = random_trajectory(rng, lim);
    CubicTrajectory leader = random_trajectory(rng, lim);
    leader = leader.shifted(follower.t0() - 0.5); // guarantee horizon overlap
    const double t1 = std::max(follower.t0(), leader.t0());
    const double t2 = std::min(follower.tf(), leader.tf());
    if (t2 <= t1)
      continue;
    const double offset = params.vehicle_length + pick_offset(rng);

    const bool analytic =
        rear_end_satisfied(follower, leader, offset, params, t1, t2);
    const CubicPoly viol = rear_end_violation(follower, leader, offset, params, t1);
    const double m_grid = sampled_max(viol, 0.0, t2 - t1);
    const double band = sampling_error_bound(viol, 0.0, t2 - t1, kStep) + 1e-12;

    if (analytic != (m_grid <= kSlackTol)) {
      // Only possible when the true maximum straddles the boundary within
      // the sampling error band.
      CHECK(std::abs(m_grid - kSlackTol) <= band);
    }
    ++checked;
    if (!analytic)
      ++violated;
  }
  // The sweep must exercise both outcomes to mean anything.
  CHECK(checked > 300);
  CHECK(violated > 20);
  CHECK(violated < checked - 20);
}

TEST_CASE("lateral: disjoint crossing windows are safe, simultaneous are not") {
  SafetyParams params;
  const CubicTrajectory a(0.3, 5.3, 16.0);
  const CubicTrajectory b_far = CubicTrajectory(0.3, 5.3, 16.0).shifted(40.0);
  // b enters its zone long after a has crossed the conflict point; b's
  // hold-back window is empty, so the pair is safe in both argument orders.
  CHECK(lateral_satisfied(a, 2.6, b_far, 2.6, params));
  CHECK(lateral_satisfied(b_far, 2.6, a, 2.6, params));
  // Identical timing through the same conflict point cannot be separated.
  CHECK_FALSE(lateral_satisfied(a, 2.6, a, 2.6, params));
}

TEST_CASE("lateral: conflict position must lie on both plans") {
  SafetyParams params;
  const CubicTrajectory a(0.3, 5.3, 16.0);
  CHECK_THROWS_AS(lateral_satisfied(a, 5.4, a, 2.6, params),
                  std::invalid_argument);
  CHECK_THROWS_AS(lateral_satisfied(a, 2.6, a, -0.1, params),
                  std::invalid_argument);
}

TEST_CASE("lateral agrees with dense sampling of the definition") {
  std::mt19937_64 rng(29);
  const Limits lim;
  SafetyParams params;
  std::uniform_real_distribution<double> frac(0.1, 0.9);
  std::uniform_real_distribution<double> shift(-3.0, 6.0);
  int disagreements = 0, violated = 0, total = 0;

  for (int i = 0; i < 400; ++i) {
    double S_i = 0.0, S_j = 0.0;
    const CubicTrajectory ti = random_trajectory(rng, lim, &S_i);
    CubicTrajectory tj = random_trajectory(rng, lim, &S_j);
    tj = tj.shifted(ti.t0() + shift(rng));
    const double p_i = S_i * frac(rng);
    const double p_j = S_j * frac(rng);

    const bool analytic = lateral_satisfied(ti, p_i, tj, p_j, params);

    // Oracle straight from the definition: one of the two vehicles keeps the
    // safe distance behind its conflict position until the other crosses its
    // own, windows clamped to the holder's horizon, sampled at 1 ms.
    auto branch = [&](const CubicTrajectory& hold, double p_hold,
                      const CubicTrajectory& cross, double p_cross,
                      bool* near_boundary) {
      const double t_cross = cross.time_at_position(p_cross);
      const double t_end = std::min(t_cross, hold.tf());
      if (t_end < hold.t0()) {
        *near_boundary = false;
        return true;
      }
      double worst = -1e300;
      for (double t = hold.t0();; t += kStep) {
        const double tc = std::min(t, t_end);
        const double viol = hold.position(tc) + params.standstill +
                            params.headway * hold.speed(tc) - p_hold;
        worst = std::max(worst, viol);
        if (tc >= t_end)
          break;
      }
      *near_boundary = std::abs(worst - kSlackTol) < 1e-5;
      return worst <= kSlackTol;
    };
    bool near_a = false, near_b = false;
    const bool oracle = branch(ti, p_i, tj, p_j, &near_a) ||
                        branch(tj, p_j, ti, p_i, &near_b);

    ++total;
    if (analytic != oracle) {
      ++disagreements;
      // Any disagreement must come from a branch extremum at the boundary.
      CHECK((near_a || near_b));
    }
    if (!analytic)
      ++violated;
  }
  CHECK(disagreements <= 2);
  CHECK(violated > 30);
  CHECK(violated < total - 30);
}

} // TEST_SUITE
