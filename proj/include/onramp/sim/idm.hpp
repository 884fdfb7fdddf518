#pragma once

#include "onramp/sim/types.hpp"

namespace onramp::sim {

// Absolute deceleration floor for any vehicle, m/s^2.
inline constexpr double kMaxBrake = 9.0;

// Intelligent driver model car-following acceleration.
//
//   a = a_max * (1 - (v / v0)^delta - (s* / gap)^2)
//   s* = s0 + v*T + v*(v - v_leader) / (2*sqrt(a_max * b))
//
// Pass gap = +infinity when there is no leader (the interaction term
// vanishes and v_leader is ignored). The result is clamped to
// [-kMaxBrake, max_accel]. gap <= 0 is a contract violation: collision
// detection must have fired first.
double idm_acceleration(double v, double v_leader, double gap, const DriverParams& p);

}  // namespace onramp::sim
