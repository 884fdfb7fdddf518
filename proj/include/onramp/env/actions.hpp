#pragma once

#include <stdexcept>

namespace onramp::env {

// Discrete action set: accelerations -3.0 .. +3.0 m/s^2 in 0.5 steps
// (indices 0..12) plus the change-lane action (index 13).
inline constexpr int kActionCount = 14;
inline constexpr int kLaneChangeAction = 13;

inline bool is_lane_change(int action) { return action == kLaneChangeAction; }

inline double action_acceleration(int action) {
  if (action < 0 || action >= kActionCount) {
    throw std::invalid_argument("action index out of range");
  }
  if (action == kLaneChangeAction) return 0.0;
  return -3.0 + 0.5 * static_cast<double>(action);
}

}  // namespace onramp::env
