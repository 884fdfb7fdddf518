#include "onramp/sim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "onramp/sim/idm.hpp"

namespace onramp::sim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Floor for virtual (cross-lane) leader gaps; a cooperative driver with the
// ego right alongside should brake as hard as the model allows.
constexpr double kMinVirtualGap = 0.01;
}  // namespace

Simulation::Simulation(const RoadNetwork& network, const ScenarioConfig& config)
    : network_(network), config_(config), rng_(config.seed) {
  vehicles_.reserve(64);
  accels_.reserve(64);
}

const Vehicle* Simulation::ego() const {
  if (ego_id_ < 0) return nullptr;
  return find_vehicle(ego_id_);
}

const Vehicle* Simulation::find_vehicle(int id) const {
  for (const auto& v : vehicles_) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

Vehicle* Simulation::vehicle_by_id(int id) {
  for (auto& v : vehicles_) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

int Simulation::index_of(int id) const {
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    if (vehicles_[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

void Simulation::insert_ego() {
  if (ego_id_ >= 0) throw std::logic_error("insert_ego: an ego already exists");
  Vehicle e;
  e.id = next_vehicle_id_++;
  e.lane = kRampLane;
  e.x = network_.ramp_entry_x();
  e.speed = kEgoEntrySpeed;
  e.params = sample_driver(0.0);
  e.is_ego = true;
  vehicles_.push_back(e);

  ego_id_ = e.id;
  episode_ego_id_ = e.id;
  episode_start_step_ = step_count_;
  ego_episode_done_ = false;
  ego_merged_ = false;
  merge_step_ = -1;
  lane_change_used_ = false;
  lane_change_step_ = -1;
  lane_change_vehicle_ = -1;
  lane_crossed_ = false;
}

std::span<const StepEvent> Simulation::step(double ego_accel, bool ego_lane_change) {
  if (ego_id_ < 0) throw std::logic_error("step: no ego vehicle in the state");
  return advance(EgoCommand{ego_accel, ego_lane_change});
}

std::span<const StepEvent> Simulation::step_humans() {
  if (ego_id_ >= 0) {
    throw std::logic_error("step_humans: an ego is present; use step()");
  }
  return advance(std::nullopt);
}

std::span<const StepEvent> Simulation::advance(const std::optional<EgoCommand>& cmd) {
  step_events_.clear();
  compute_accelerations(cmd);
  integrate();
  update_lane_change();
  ++step_count_;
  if (step_count_ % kStepsPerSecond == 0) {
    lane_change_tick();
    spawn_tick();
  }
  detect_events();
  remove_departed();
  return step_events_;
}

void Simulation::compute_accelerations(const std::optional<EgoCommand>& cmd) {
  accels_.assign(vehicles_.size(), 0.0);
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    const Vehicle& v = vehicles_[i];
    if (v.is_ego) continue;
    const auto lead = effective_leader(v);
    accels_[i] = lead ? idm_acceleration(v.speed, lead->speed, lead->gap, v.params)
                      : idm_acceleration(v.speed, 0.0, kInf, v.params);
  }
  if (!cmd) return;

  const int ego_idx = index_of(ego_id_);
  Vehicle& e = vehicles_[ego_idx];
  double accel = std::clamp(cmd->accel, -kEgoAccelLimit, kEgoAccelLimit);
  if (cmd->lane_change) {
    const bool accepted = !lane_change_used_ && lane_change_step_ < 0 &&
                          e.lane == kRampLane &&
                          e.x >= network_.parallel_start_x() &&
                          network_.merge_end_x - e.x >= kLaneChangeDeadline;
    if (accepted) {
      lane_change_used_ = true;
      lane_change_step_ = 0;
      lane_change_vehicle_ = e.id;
      lane_crossed_ = false;
      accel = 0.0;
    } else {
      accel = 0.0;  // rejected change-lane behaves as zero acceleration
    }
  }
  accels_[ego_idx] = accel;
}

void Simulation::integrate() {
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    Vehicle& v = vehicles_[i];
    const double speed_new = std::max(0.0, v.speed + accels_[i] * kDt);
    v.last_accel = (speed_new - v.speed) / kDt;
    v.speed = speed_new;
    v.x += speed_new * kDt;
  }
}

void Simulation::update_lane_change() {
  pending_merge_ = false;
  if (lane_change_step_ < 0) return;
  ++lane_change_step_;
  Vehicle* v = vehicle_by_id(lane_change_vehicle_);
  if (!v) {
    lane_change_step_ = -1;
    return;
  }
  // Cosine-eased S profile: lateral travel 0 -> lane_width over 2 s, the
  // centre crossing the boundary exactly halfway through.
  const double t = static_cast<double>(lane_change_step_) * kDt;
  const double travel =
      0.5 * network_.lane_width *
      (1.0 - std::cos(std::numbers::pi * t / (kLaneChangeSteps * kDt)));
  if (!lane_crossed_ && lane_change_step_ >= kLaneCrossStep) {
    lane_crossed_ = true;
    v->lane = kRightLane;
    pending_merge_ = v->is_ego;
  }
  v->y_offset = lane_crossed_ ? travel - network_.lane_width : travel;
  if (lane_change_step_ >= kLaneChangeSteps) {
    v->y_offset = 0.0;
    lane_change_step_ = -1;
  }
}

std::optional<LeaderInfo> Simulation::effective_leader(const Vehicle& v) const {
  if (v.is_ego) {
    throw std::invalid_argument("effective_leader: expects a human vehicle");
  }
  auto in_lane = leader_in_lane(v, v.lane, -1);
  if (in_lane && in_lane->gap <= 0.0) {
    throw SimulationDefect("effective_leader: non-positive in-lane gap (missed collision)");
  }
  if (v.lane == kRightLane && v.params.cooperative && ego_id_ >= 0) {
    const Vehicle* e = ego();
    if (e && e->lane == kRampLane && network_.in_parallel_section(e->x) &&
        e->x > v.x) {
      const double vgap = std::max(e->rear() - v.x, kMinVirtualGap);
      if (!in_lane || vgap < in_lane->gap) {
        return LeaderInfo{e->id, vgap, e->speed};
      }
    }
  }
  return in_lane;
}

bool Simulation::occupies(const Vehicle& w, int lane, bool straddle) const {
  if (w.lane == lane) return true;
  // A vehicle mid-manoeuvre spans both the ramp lane and the right lane.
  return straddle && lane_change_step_ >= 0 && w.id == lane_change_vehicle_ &&
         (lane == kRampLane || lane == kRightLane);
}

std::optional<LeaderInfo> Simulation::leader_in_lane(const Vehicle& v, int lane,
                                                     int ignore_id,
                                                     bool straddle) const {
  const Vehicle* best = nullptr;
  for (const auto& w : vehicles_) {
    if (w.id == v.id || w.id == ignore_id) continue;
    if (!occupies(w, lane, straddle)) continue;
    if (w.x <= v.x) continue;
    if (!best || w.x < best->x || (w.x == best->x && w.id < best->id)) {
      best = &w;
    }
  }
  if (!best) return std::nullopt;
  return LeaderInfo{best->id, best->rear() - v.x, best->speed};
}

std::optional<LeaderInfo> Simulation::follower_in_lane(const Vehicle& v, int lane,
                                                       int ignore_id,
                                                       bool straddle) const {
  const Vehicle* best = nullptr;
  for (const auto& w : vehicles_) {
    if (w.id == v.id || w.id == ignore_id) continue;
    if (!occupies(w, lane, straddle)) continue;
    if (w.x > v.x) continue;
    if (!best || w.x > best->x || (w.x == best->x && w.id < best->id)) {
      best = &w;
    }
  }
  if (!best) return std::nullopt;
  return LeaderInfo{best->id, v.rear() - best->x, best->speed};
}

double Simulation::idm_accel_in_lane(const Vehicle& v, int as_lane, int ignore_id,
                                     bool straddle) const {
  auto best = leader_in_lane(v, as_lane, ignore_id, straddle);
  if (as_lane == kRightLane && v.params.cooperative && ego_id_ >= 0) {
    const Vehicle* e = ego();
    if (e && e->id != v.id && e->lane == kRampLane &&
        network_.in_parallel_section(e->x) && e->x > v.x) {
      const double vgap = std::max(e->rear() - v.x, kMinVirtualGap);
      if (!best || vgap < best->gap) best = LeaderInfo{e->id, vgap, e->speed};
    }
  }
  if (!best) return idm_acceleration(v.speed, 0.0, kInf, v.params);
  return idm_acceleration(v.speed, best->speed, std::max(best->gap, kMinVirtualGap),
                          v.params);
}

bool Simulation::mobil_wants_change(const Vehicle& v, int target_lane) const {
  const auto new_lead = leader_in_lane(v, target_lane, -1, true);
  const auto new_foll = follower_in_lane(v, target_lane, -1, true);
  if (new_lead && new_lead->gap <= 0.0) return false;
  if (new_foll && new_foll->gap <= 0.0) return false;

  double loss_new_follower = 0.0;
  if (new_foll) {
    const Vehicle* f = find_vehicle(new_foll->id);
    const double after = idm_acceleration(f->speed, v.speed, new_foll->gap, f->params);
    if (after < -f->params.comfortable_decel) return false;  // safety veto
    if (!f->is_ego) {
      const double before = idm_accel_in_lane(*f, f->lane, -1, false);
      loss_new_follower = before - after;
    }
  }

  double loss_old_follower = 0.0;
  const auto old_foll = follower_in_lane(v, v.lane, -1, false);
  if (old_foll) {
    const Vehicle* f = find_vehicle(old_foll->id);
    if (!f->is_ego) {
      const double before = idm_accel_in_lane(*f, f->lane, -1, false);
      const double after = idm_accel_in_lane(*f, f->lane, v.id, false);
      loss_old_follower = before - after;
    }
  }

  const double gain = idm_accel_in_lane(v, target_lane, -1, true) -
                      idm_accel_in_lane(v, v.lane, -1, false);
  return gain > kMobilThreshold +
                    kMobilPoliteness * (loss_new_follower + loss_old_follower);
}

void Simulation::lane_change_tick() {
  // Front-to-back pass over human highway vehicles; one change per vehicle
  // per second since the rule runs once per simulated second.
  std::vector<int> order;
  order.reserve(vehicles_.size());
  for (const auto& v : vehicles_) {
    if (v.is_ego) continue;
    if (v.lane != kRightLane && v.lane != kLeftLane) continue;
    if (lane_change_step_ >= 0 && v.id == lane_change_vehicle_) continue;
    order.push_back(v.id);
  }
  std::sort(order.begin(), order.end(), [this](int a, int b) {
    const Vehicle* va = find_vehicle(a);
    const Vehicle* vb = find_vehicle(b);
    if (va->x != vb->x) return va->x > vb->x;
    return a < b;
  });
  for (const int id : order) {
    Vehicle* v = vehicle_by_id(id);
    const int target = (v->lane == kRightLane) ? kLeftLane : kRightLane;
    if (mobil_wants_change(*v, target)) v->lane = target;
  }
}

DriverParams Simulation::sample_driver(double uncoop_fraction) {
  DriverParams p;
  p.desired_speed = rng_.positive_normal(26.0, 0.1);
  p.cooperative = !rng_.bernoulli(uncoop_fraction);
  return p;
}

void Simulation::try_spawn(int lane, double probability, double uncoop_fraction) {
  if (!rng_.bernoulli(probability)) return;
  (lane == kRightLane ? stats_.right_attempts : stats_.left_attempts)++;

  DriverParams params = sample_driver(uncoop_fraction);
  const Vehicle* lead = nullptr;
  for (const auto& w : vehicles_) {
    if (w.lane != lane) continue;
    if (!lead || w.x < lead->x) lead = &w;
  }
  if (lead) {
    const double gap = lead->rear() - network_.highway_start_x();
    // Discard (never queue) arrivals that would start too close or would
    // have to brake into the flow; kHardBrakeDecel keeps entries from
    // registering as hard braking.
    if (gap < params.min_gap + 2.0 ||
        idm_acceleration(kHighwayEntrySpeed, lead->speed, gap, params) <
            -kHardBrakeDecel) {
      return;
    }
  }

  Vehicle v;
  v.id = next_vehicle_id_++;
  v.lane = lane;
  v.x = network_.highway_start_x();
  v.speed = kHighwayEntrySpeed;
  v.params = params;
  vehicles_.push_back(v);
  (lane == kRightLane ? stats_.right_inserted : stats_.left_inserted)++;
  push_event(EventKind::kSpawn, {v.id});
}

void Simulation::spawn_tick() {
  try_spawn(kRightLane, config_.inflow_right, config_.uncooperative_fraction);
  try_spawn(kLeftLane, config_.inflow_left, 0.0);
  if (config_.auto_spawn_ego && ego_id_ < 0 && ego_episode_done_) insert_ego();
}

void Simulation::detect_events() {
  // Collisions: same-lane longitudinal overlap.
  std::vector<int> lane_order;
  bool ego_collided = false;
  for (int lane = kRampLane; lane <= kLeftLane; ++lane) {
    lane_order.clear();
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
      if (vehicles_[i].lane == lane) lane_order.push_back(static_cast<int>(i));
    }
    std::sort(lane_order.begin(), lane_order.end(), [this](int a, int b) {
      if (vehicles_[a].x != vehicles_[b].x) return vehicles_[a].x < vehicles_[b].x;
      return vehicles_[a].id < vehicles_[b].id;
    });
    for (std::size_t k = 1; k < lane_order.size(); ++k) {
      const Vehicle& follower = vehicles_[lane_order[k - 1]];
      const Vehicle& leader = vehicles_[lane_order[k]];
      if (leader.rear() - follower.x < 0.0) {
        push_event(EventKind::kCollision,
                   {std::min(follower.id, leader.id), std::max(follower.id, leader.id)});
        if (follower.id == episode_ego_id_ || leader.id == episode_ego_id_) {
          ego_collided = true;
        }
      }
    }
  }

  // Running off the end of the merging lane is a crash into the lane end.
  if (ego_id_ >= 0) {
    const Vehicle* e = ego();
    if (e->lane == kRampLane && e->x >= network_.merge_end_x) {
      push_event(EventKind::kCollision, {e->id});
      ego_collided = true;
    }
  }

  // A collision between two flow vehicles is a model defect: IDM with safe
  // lane changes must be collision-free. Vehicles that were the ego earlier
  // in this episode are exempt shortly after merging (a bad merge can force
  // an unavoidable rear-end collision which is the agent's fault).
  for (const auto& ev : step_events_) {
    if (ev.kind != EventKind::kCollision) continue;
    bool exempt = false;
    for (const int id : ev.vehicle_ids) {
      if (id != episode_ego_id_) continue;
      const bool merged_recently =
          ego_merged_ && merge_step_ >= 0 && step_count_ - merge_step_ <= 100;
      if (!ego_merged_ || merged_recently) exempt = true;
    }
    if (!exempt) {
      std::ostringstream msg;
      msg << "human-human collision at t=" << clock() << "s between ids";
      for (const int id : ev.vehicle_ids) msg << ' ' << id;
      throw SimulationDefect(msg.str());
    }
  }

  for (const auto& v : vehicles_) {
    if (v.last_accel <= -kHardBrakeDecel) {
      push_event(EventKind::kHardBrake, {v.id});
    }
  }

  // Standalone mode keeps running: clear any wreck immediately.
  if (config_.auto_spawn_ego) {
    std::erase_if(vehicles_, [&](const Vehicle& v) {
      for (const auto& ev : step_events_) {
        if (ev.kind != EventKind::kCollision) continue;
        for (const int id : ev.vehicle_ids) {
          if (id == v.id) return true;
        }
      }
      return false;
    });
  }

  if (ego_collided && ego_id_ >= 0) {
    ego_episode_done_ = true;
    ego_id_ = -1;
    lane_change_step_ = -1;
  } else if (pending_merge_) {
    Vehicle* v = vehicle_by_id(episode_ego_id_);
    push_event(EventKind::kEgoMerged, {v->id});
    v->is_ego = false;  // control passes to the simulator
    ego_merged_ = true;
    merge_step_ = step_count_;
    ego_episode_done_ = true;
    ego_id_ = -1;
  } else if (ego_id_ >= 0 && step_count_ - episode_start_step_ >= kTimeoutSteps) {
    push_event(EventKind::kEgoTimeout, {ego_id_});
    ego_episode_done_ = true;
    if (config_.auto_spawn_ego) {
      const int id = ego_id_;
      std::erase_if(vehicles_, [id](const Vehicle& v) { return v.id == id; });
    }
    ego_id_ = -1;
  }
  pending_merge_ = false;
}

void Simulation::remove_departed() {
  const double end = network_.highway_end_x();
  std::erase_if(vehicles_, [end](const Vehicle& v) { return v.rear() > end; });
}

void Simulation::push_event(EventKind kind, std::vector<int> ids) {
  StepEvent ev{kind, std::move(ids), clock()};
  step_events_.push_back(ev);
  if (log_events_) event_log_.push_back(std::move(ev));
}

}  // namespace onramp::sim
