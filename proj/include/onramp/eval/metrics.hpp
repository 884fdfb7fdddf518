#pragma once

#include <span>

#include "onramp/env/merge_env.hpp"
#include "onramp/sim/types.hpp"

namespace onramp::eval {

// Time to collision with the first trailing vehicle at the merge instant:
// g_t1 / (v_t1 - v_ego). Values <= 0 mean no collision under constant
// velocities; equal speeds give +infinity.
double ttc_trailing(double g_t1, double v_t1, double v_ego);

// Symmetric counterpart for the first leading vehicle: g_l1 / (v_ego - v_l1).
double ttc_leading(double g_l1, double v_ego, double v_l1);

// Fraction of the chosen gap the ego is displaced from its centre. Uses the
// raw g_c (no distance cutoff). g_0 = 0 is a contract violation.
double gap_ratio(double g_c, double g_0);

// True iff a hard-brake event fired for one of the merge parties (ego, T1,
// L1) between the ego's entry to the parallel section and 5 s after the
// merge (episode end when the merge never happened).
bool detect_conflict(std::span<const sim::StepEvent> events,
                     const env::EpisodeOutcome& outcome);

inline constexpr double kConflictWindowAfterMerge = 5.0;  // s
inline constexpr double kTtcThreshold = 10.0;             // s
inline constexpr double kGapRatioThreshold = 0.5;

}  // namespace onramp::eval
