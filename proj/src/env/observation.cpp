#include "onramp/env/observation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace onramp::env {

namespace {

using sim::kLeftLane;
using sim::kRampLane;
using sim::kRightLane;
using sim::Vehicle;

double clip(double v) { return std::clamp(v, -kObsClip, kObsClip); }

// Nearest vehicle in `lane` whose rear bumper is ahead of `front_x`.
const Vehicle* lane_leader(const sim::Simulation& s, int lane, double front_x,
                           int exclude_id) {
  const Vehicle* best = nullptr;
  for (const auto& w : s.vehicles()) {
    if (w.id == exclude_id || w.lane != lane) continue;
    if (w.rear() <= front_x) continue;
    if (!best || w.x < best->x || (w.x == best->x && w.id < best->id)) best = &w;
  }
  return best;
}

// Nearest vehicle in `lane` whose front bumper is behind `rear_x`.
const Vehicle* lane_trailer(const sim::Simulation& s, int lane, double rear_x,
                            int exclude_id) {
  const Vehicle* best = nullptr;
  for (const auto& w : s.vehicles()) {
    if (w.id == exclude_id || w.lane != lane) continue;
    if (w.x >= rear_x) continue;
    if (!best || w.x > best->x || (w.x == best->x && w.id < best->id)) best = &w;
  }
  return best;
}

}  // namespace

MergeContext merge_context(const sim::Simulation& state) {
  const Vehicle* ego = state.find_vehicle(state.episode_ego_id());
  if (!ego) throw std::logic_error("merge_context: no ego vehicle in the state");

  // Reference lane: the right highway lane while merging into it; after the
  // merge the ego is in that lane, so neighbours come from its own lane.
  const bool merged = ego->lane != kRampLane;
  const int ref_lane = merged ? ego->lane : kRightLane;

  MergeContext ctx;
  ctx.v_ego = ego->speed;

  if (const Vehicle* l1 = lane_leader(state, ref_lane, ego->x, ego->id)) {
    ctx.l1 = NeighborInfo{l1->id, l1->speed, l1->rear() - ego->x};
    if (const Vehicle* l2 = lane_leader(state, ref_lane, l1->x, ego->id)) {
      ctx.l2 = NeighborInfo{l2->id, l2->speed, l2->rear() - l1->x};
    }
  }
  if (const Vehicle* t1 = lane_trailer(state, ref_lane, ego->rear(), ego->id)) {
    ctx.t1 = NeighborInfo{t1->id, t1->speed, ego->rear() - t1->x};
    if (const Vehicle* t2 = lane_trailer(state, ref_lane, t1->rear(), ego->id)) {
      ctx.t2 = NeighborInfo{t2->id, t2->speed, t1->rear() - t2->x};
    }
  }

  // Longitudinally overlapping vehicle in the adjacent lane. Before the
  // merge that is the right highway lane; afterwards the next lane left.
  const int adjacent_lane = merged ? std::min(ego->lane + 1, kLeftLane) : kRightLane;
  const Vehicle* overlap = nullptr;
  for (const auto& w : state.vehicles()) {
    if (w.id == ego->id || w.lane != adjacent_lane) continue;
    if (w.rear() > ego->x || w.x < ego->rear()) continue;
    if (!overlap ||
        std::abs(w.center() - ego->center()) < std::abs(overlap->center() - ego->center())) {
      overlap = &w;
    }
  }
  ctx.v_adjacent = overlap ? overlap->speed : 0.0;

  // Phantom completion: missing neighbours sit just outside the network at
  // the ego's speed.
  const double net_start = state.network().highway_start_x();
  const double net_end = state.network().highway_end_x();
  const double l1_rear = ctx.l1 ? ego->x + ctx.l1->gap : net_end;
  const double t1_front = ctx.t1 ? ego->rear() - ctx.t1->gap : net_start;
  ctx.v_l1_eff = ctx.l1 ? ctx.l1->speed : ego->speed;
  ctx.v_t1_eff = ctx.t1 ? ctx.t1->speed : ego->speed;
  ctx.head_gap = l1_rear - ego->x;
  ctx.tail_gap = ego->rear() - t1_front;
  ctx.g0 = l1_rear - t1_front;
  ctx.gc = std::abs(ego->center() - 0.5 * (l1_rear + t1_front));
  return ctx;
}

Observation observe(const sim::Simulation& state) {
  const Vehicle* ego = state.find_vehicle(state.episode_ego_id());
  if (!ego) throw std::logic_error("observe: no ego vehicle in the state");
  const MergeContext ctx = merge_context(state);
  const auto& net = state.network();

  Observation obs;
  auto& v = obs.values;
  v[0] = clip(ego->speed / kSpeedNorm);
  v[1] = ctx.t1 ? clip(ctx.t1->speed / kSpeedNorm) : 0.0;
  v[2] = ctx.t2 ? clip(ctx.t2->speed / kSpeedNorm) : 0.0;
  v[3] = ctx.l1 ? clip(ctx.l1->speed / kSpeedNorm) : 0.0;
  v[4] = ctx.l2 ? clip(ctx.l2->speed / kSpeedNorm) : 0.0;
  v[5] = clip(ctx.v_adjacent / kSpeedNorm);
  v[6] = ctx.t1 ? clip(ctx.t1->gap / kGapNorm) : 0.0;
  v[7] = ctx.t2 ? clip(ctx.t2->gap / kGapNorm) : 0.0;
  v[8] = ctx.l1 ? clip(ctx.l1->gap / kGapNorm) : 0.0;
  v[9] = ctx.l2 ? clip(ctx.l2->gap / kGapNorm) : 0.0;
  v[10] = clip((ego->x - net.merge_end_x) / kDistanceNorm);
  v[11] = clip(ego->y_offset / net.lane_width);

  // Lane index / lane count within the ego's current section, raw.
  if (ego->lane == kRampLane) {
    v[12] = 0.0;
    v[13] = net.in_parallel_section(ego->x) ? 3.0 : 1.0;
  } else {
    v[12] = static_cast<double>(ego->lane - kRightLane);
    v[13] = static_cast<double>(net.highway_lane_count);
  }
  return obs;
}

}  // namespace onramp::env
