#pragma once

#include <deque>
#include <string>
#include <vector>

#include "cavsim/trajectory.hpp"

namespace cavsim {

/**
 * @brief Intelligent-driver-model parameters, scaled to the testbed's 1:25
 * geometry. Jam distance and time headway reuse the coordination layer's
 * standstill distance and reaction headway so the two controllers brake for
 * the same gaps.
 */
struct IdmParams {
  double desired_speed = 0.5; ///< free-flow target v0 [m/s]
  double max_accel = 0.3;     ///< a [m/s^2]
  double comfort_decel = 0.4; ///< b [m/s^2]
  double exponent = 4.0;      ///< free-flow exponent delta
  double jam_distance = 0.07; ///< s0 [m]
  double time_headway = 1.0;  ///< T [s]

  /** @throws std::invalid_argument unless every field is positive. */
  void validate() const;
};

/**
 * @brief Car-following acceleration.
 *
 * a = a_max * [1 - (v / v0)^delta - (s* / s)^2] with the desired gap
 * s* = s0 + max(0, v*T + v*dv / (2*sqrt(a_max*b))); the max() guard keeps a
 * closing leader from shrinking the desired gap below the jam distance.
 * The result is clamped to [u_min, u_max]; a non-positive gap commands u_min.
 *
 * @param v   ego speed [m/s]
 * @param dv  approach rate v_ego - v_leader [m/s]
 * @param gap bumper-to-bumper distance [m]
 */
double idm_accel(double v, double dv, double gap, const IdmParams& params,
                 const Limits& limits);

/** Free-road variant: no leader, only the free-flow term. */
double idm_accel_free(double v, const IdmParams& params, const Limits& limits);

/**
 * @brief A yield-controlled merging zone: the ego approach must give way when
 * any mainline vehicle is inside the zone or within @ref threshold of its
 * entrance.
 */
struct YieldZone {
  std::string mainline_path; ///< path whose traffic has priority
  double zone_start = 0.0;   ///< merge-zone entrance, mainline arc length [m]
  double zone_end = 0.0;     ///< merge-zone exit, mainline arc length [m]
  double threshold = 0.4;    ///< upstream clearance that still forces a yield [m]
};

/**
 * @brief Stateless yield decision.
 * @param mainline_positions arc-length positions of mainline vehicles [m]
 * @return true when the ego must yield at the zone entrance.
 */
bool yield_required(const YieldZone& zone, const std::vector<double>& mainline_positions);

/**
 * @brief First-in-first-out queue for a four-way-stop intersection.
 *
 * Vehicles enqueue when they enter an approach segment. The front vehicle is
 * released only when the merging zone is empty and it has come to a complete
 * stop, i.e. its speed stayed below 0.005 m/s for 0.2 s (speeds never reach
 * exactly zero in floating point).
 */
class StopQueue {
public:
  static constexpr double kStopSpeed = 0.005; ///< [m/s]
  static constexpr double kStopHold = 0.2;    ///< [s]

  /** @brief Append a vehicle; re-enqueueing a queued vehicle is ignored. */
  void enqueue(int vehicle_id);

  bool contains(int vehicle_id) const;

  /**
   * @brief Advance the stop clock and release the front vehicle if allowed.
   * @param zone_occupied whether any vehicle is inside the merging zone
   * @param front_speed   current speed of the front vehicle [m/s]
   * @param now           simulation time [s]
   * @return released vehicle id, or -1 when nothing is released.
   */
  int step(bool zone_occupied, double front_speed, double now);

  const std::deque<int>& queue() const { return queue_; }
  bool empty() const { return queue_.empty(); }
  int front() const { return queue_.front(); }

private:
  std::deque<int> queue_;
  int stopped_vehicle_ = -1; ///< front vehicle the stop clock refers to
  double stopped_since_ = 0.0;
};

} // namespace cavsim
