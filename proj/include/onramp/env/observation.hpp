#pragma once

#include <array>
#include <optional>

#include "onramp/sim/simulation.hpp"

namespace onramp::env {

inline constexpr int kObservationSize = 14;

// Normalization constants for the observation vector.
inline constexpr double kSpeedNorm = 30.0;   // m/s
inline constexpr double kGapNorm = 200.0;    // m
inline constexpr double kDistanceNorm = 275.0;  // ramp entry to merge end, m
inline constexpr double kObsClip = 1.5;

// The 14-entry state vector, ordered
// [v_ego, v_t1, v_t2, v_l1, v_l2, v_ad, g_t1, g_t2, g_l1, g_l2, x, y, c, n].
struct Observation {
  std::array<double, kObservationSize> values{};

  double v_ego() const { return values[0]; }
  double v_t1() const { return values[1]; }
  double v_t2() const { return values[2]; }
  double v_l1() const { return values[3]; }
  double v_l2() const { return values[4]; }
  double v_ad() const { return values[5]; }
  double g_t1() const { return values[6]; }
  double g_t2() const { return values[7]; }
  double g_l1() const { return values[8]; }
  double g_l2() const { return values[9]; }
  double x() const { return values[10]; }
  double y() const { return values[11]; }
  double lane_index() const { return values[12]; }
  double lane_count() const { return values[13]; }
};

struct NeighborInfo {
  int id = -1;
  double speed = 0.0;
  double gap = 0.0;  // bumper-to-bumper, m
};

// Raw neighbourhood of the ego in its reference lane (the adjacent right
// highway lane until the merge completes, its own lane afterwards), plus the
// phantom-completed quantities the reward and the merge snapshot need.
// Phantoms sit just outside the network travelling at the ego's speed.
struct MergeContext {
  std::optional<NeighborInfo> l1, l2, t1, t2;
  double v_adjacent = 0.0;  // vehicle longitudinally overlapping the ego, else 0

  double v_ego = 0.0;
  double v_l1_eff = 0.0;  // phantom-completed
  double v_t1_eff = 0.0;
  double head_gap = 0.0;  // ego to L1 (or to the network end)
  double tail_gap = 0.0;  // T1 to ego (or from the network start)
  double g0 = 0.0;        // L1 rear to T1 front
  double gc = 0.0;        // |ego centre - gap centre|
};

// Both throw if the state never had an ego this episode.
MergeContext merge_context(const sim::Simulation& state);
Observation observe(const sim::Simulation& state);

}  // namespace onramp::env
