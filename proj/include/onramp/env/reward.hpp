#pragma once

#include <numbers>
#include <span>

#include "onramp/sim/simulation.hpp"

namespace onramp::env {

// Social-value-orientation weighted reward parameters. phi = 0 is fully
// individualist, pi/4 prosocial, pi/2 altruistic.
struct RewardConfig {
  double phi = std::numbers::pi / 4.0;
  double w1 = 1.0 / 13.0;
  double w2 = 4.0 / 13.0;
  double w3 = 15.0 / 389.0;
  double w4 = 6.0 / 13.0;
  double w5 = 8.0 / 13.0;
  double d = 40.0;              // head/tail gap beyond which centring is free
  double crash_penalty = -20.0;
};

// Utility of the merge to the ego: high speed, but no faster than its
// leader. Raw (unnormalized) speeds; with no leader pass v_l1 = v_ego.
double ego_utility(double v_ego, double v_l1, const RewardConfig& cfg);

// Utility of the merge to the surrounding vehicles: big gaps, centred, and
// no slower than the trailing vehicle. g0 is the bumper gap between the
// adjacent-lane leader and trailer; gc the ego centre's distance from the
// gap centre. gc is ignored when both head and tail gaps exceed cfg.d.
double sv_utility(double g0, double gc, double head_gap, double tail_gap,
                  double v_ego, double v_t1, const RewardConfig& cfg);

// Per-step reward: 0 until the ego reaches the parallel section,
// crash_penalty on a collision involving the ego, otherwise
// U_EGO*cos(phi) + U_SV*sin(phi) on the current raw state.
double reward(const sim::Simulation& state, std::span<const sim::StepEvent> events,
              const RewardConfig& cfg);

}  // namespace onramp::env
