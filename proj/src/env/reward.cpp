#include "onramp/env/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "onramp/env/observation.hpp"

namespace onramp::env {

double ego_utility(double v_ego, double v_l1, const RewardConfig& cfg) {
  return cfg.w1 * v_ego + cfg.w2 * std::min(v_l1 - v_ego, 0.0);
}

double sv_utility(double g0, double gc, double head_gap, double tail_gap,
                  double v_ego, double v_t1, const RewardConfig& cfg) {
  if (g0 < 0.0) throw std::invalid_argument("sv_utility: g0 must be non-negative");
  const double effective_gc = (head_gap > cfg.d && tail_gap > cfg.d) ? 0.0 : gc;
  return cfg.w3 * g0 - cfg.w4 * effective_gc +
         cfg.w5 * std::min(v_ego - v_t1, 0.0);
}

double reward(const sim::Simulation& state, std::span<const sim::StepEvent> events,
              const RewardConfig& cfg) {
  const sim::Vehicle* ego = state.find_vehicle(state.episode_ego_id());
  if (!ego) throw std::logic_error("reward: no ego vehicle in the state");

  const bool reached_parallel =
      ego->lane != sim::kRampLane || ego->x >= state.network().parallel_start_x();
  if (!reached_parallel) return 0.0;

  for (const auto& ev : events) {
    if (ev.kind != sim::EventKind::kCollision) continue;
    for (const int id : ev.vehicle_ids) {
      if (id == state.episode_ego_id()) return cfg.crash_penalty;
    }
  }

  const MergeContext ctx = merge_context(state);
  const double u_ego = ego_utility(ctx.v_ego, ctx.v_l1_eff, cfg);
  const double u_sv = sv_utility(ctx.g0, ctx.gc, ctx.head_gap, ctx.tail_gap,
                                 ctx.v_ego, ctx.v_t1_eff, cfg);
  return u_ego * std::cos(cfg.phi) + u_sv * std::sin(cfg.phi);
}

}  // namespace onramp::env
