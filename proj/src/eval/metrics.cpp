#include "onramp/eval/metrics.hpp"

#include <limits>
#include <stdexcept>

namespace onramp::eval {

double ttc_trailing(double g_t1, double v_t1, double v_ego) {
  if (v_t1 == v_ego) return std::numeric_limits<double>::infinity();
  return g_t1 / (v_t1 - v_ego);
}

double ttc_leading(double g_l1, double v_ego, double v_l1) {
  if (v_ego == v_l1) return std::numeric_limits<double>::infinity();
  return g_l1 / (v_ego - v_l1);
}

double gap_ratio(double g_c, double g_0) {
  if (g_0 <= 0.0) {
    throw std::invalid_argument("gap_ratio: g_0 must be positive (overlap implies collision)");
  }
  return g_c / g_0;
}

bool detect_conflict(std::span<const sim::StepEvent> events,
                     const env::EpisodeOutcome& outcome) {
  if (outcome.parallel_entry_clock < 0.0) return false;  // never reached the zone
  const double window_start = outcome.parallel_entry_clock;
  const double window_end = outcome.merge_clock
                                ? *outcome.merge_clock + kConflictWindowAfterMerge
                                : outcome.end_clock;
  const int t1 = outcome.merge_snapshot ? outcome.merge_snapshot->t1_id : -1;
  const int l1 = outcome.merge_snapshot ? outcome.merge_snapshot->l1_id : -1;

  for (const auto& ev : events) {
    if (ev.kind != sim::EventKind::kHardBrake) continue;
    if (ev.clock < window_start || ev.clock > window_end) continue;
    for (const int id : ev.vehicle_ids) {
      if (id == outcome.ego_id || (t1 >= 0 && id == t1) || (l1 >= 0 && id == l1)) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace onramp::eval
