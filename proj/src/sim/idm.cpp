#include "onramp/sim/idm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace onramp::sim {

double idm_acceleration(double v, double v_leader, double gap, const DriverParams& p) {
  if (!(gap > 0.0)) {
    throw std::invalid_argument("idm_acceleration: gap must be positive");
  }
  if (v < 0.0) {
    throw std::invalid_argument("idm_acceleration: speed must be non-negative");
  }
  const double free_term = std::pow(v / p.desired_speed, p.accel_exponent);
  const double s_star =
      p.min_gap + v * p.time_headway +
      v * (v - v_leader) / (2.0 * std::sqrt(p.max_accel * p.comfortable_decel));
  const double ratio = s_star / gap;  // 0 when gap is infinite
  const double a = p.max_accel * (1.0 - free_term - ratio * ratio);
  return std::clamp(a, -kMaxBrake, p.max_accel);
}

}  // namespace onramp::sim
