#include "cavsim/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cavsim {

void IdmParams::validate() const {
  if (!(desired_speed > 0.0) || !(max_accel > 0.0) || !(comfort_decel > 0.0) ||
      !(exponent > 0.0) || !(jam_distance > 0.0) || !(time_headway > 0.0))
    throw std::invalid_argument("IdmParams: all parameters must be positive");
}

double idm_accel(double v, double dv, double gap, const IdmParams& params,
                 const Limits& limits) {
  if (gap <= 0.0)
    return limits.u_min; // overlap: emergency braking
  const double interaction =
      v * params.time_headway +
      v * dv / (2.0 * std::sqrt(params.max_accel * params.comfort_decel));
  const double desired_gap = params.jam_distance + std::max(0.0, interaction);
  const double free_term = std::pow(v / params.desired_speed, params.exponent);
  const double gap_term = desired_gap / gap;
  const double accel = params.max_accel * (1.0 - free_term - gap_term * gap_term);
  return std::clamp(accel, limits.u_min, limits.u_max);
}

double idm_accel_free(double v, const IdmParams& params, const Limits& limits) {
  const double accel =
      params.max_accel * (1.0 - std::pow(v / params.desired_speed, params.exponent));
  return std::clamp(accel, limits.u_min, limits.u_max);
}

bool yield_required(const YieldZone& zone, const std::vector<double>& mainline_positions) {
  return std::any_of(mainline_positions.begin(), mainline_positions.end(),
                     [&](double s) {
                       return s >= zone.zone_start - zone.threshold && s <= zone.zone_end;
                     });
}

void StopQueue::enqueue(int vehicle_id) {
  if (!contains(vehicle_id))
    queue_.push_back(vehicle_id);
}

bool StopQueue::contains(int vehicle_id) const {
  return std::find(queue_.begin(), queue_.end(), vehicle_id) != queue_.end();
}

int StopQueue::step(bool zone_occupied, double front_speed, double now) {
  if (queue_.empty())
    return -1;
  const int front = queue_.front();
  if (front_speed < kStopSpeed) {
    if (stopped_vehicle_ != front) {
      stopped_vehicle_ = front;
      stopped_since_ = now;
    }
  } else {
    stopped_vehicle_ = -1;
  }
  const bool fully_stopped =
      stopped_vehicle_ == front && now - stopped_since_ >= kStopHold - 1e-9;
  if (fully_stopped && !zone_occupied) {
    queue_.pop_front();
    stopped_vehicle_ = -1;
    return front;
  }
  return -1;
}

} // namespace cavsim
