#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "onramp/sim/network.hpp"
#include "onramp/sim/types.hpp"
#include "onramp/util/rng.hpp"

namespace onramp::sim {

// Raised when the simulator reaches a state the model forbids (e.g. a
// collision between two flow vehicles, which IDM + safe lane changes must
// never produce).
class SimulationDefect : public std::logic_error {
 public:
  explicit SimulationDefect(const std::string& what) : std::logic_error(what) {}
};

struct LeaderInfo {
  int id = -1;
  double gap = 0.0;  // bumper-to-bumper, m
  double speed = 0.0;
};

// Discrete-time microscopic simulator of the merge scenario. Advances at
// dt = 0.1 s; human vehicles follow IDM with MOBIL lane changes and the
// cooperative yield rule, the ego (when present) is externally controlled
// until its merge completes. Identical seed + identical action sequence
// gives a bit-identical trajectory and event log.
class Simulation {
 public:
  static constexpr double kDt = 0.1;
  static constexpr int kStepsPerSecond = 10;
  static constexpr double kEgoAccelLimit = 3.0;       // |a| bound, m/s^2
  static constexpr double kHardBrakeDecel = 3.0;      // event threshold, m/s^2
  static constexpr long kTimeoutSteps = 1500;         // 150 s
  static constexpr int kLaneChangeSteps = 20;         // 2.0 s manoeuvre
  static constexpr int kLaneCrossStep = 10;           // centre crosses at 1.0 s
  static constexpr double kLaneChangeDeadline = 5.0;  // m of parallel lane left
  static constexpr double kEgoEntrySpeed = 13.0;      // m/s
  static constexpr double kHighwayEntrySpeed = 26.0;  // m/s
  static constexpr double kMobilPoliteness = 0.5;
  static constexpr double kMobilThreshold = 0.2;      // m/s^2

  Simulation(const RoadNetwork& network, const ScenarioConfig& config);

  // Advance one step with ego control. Throws if no ego is present.
  // ego_accel is clamped to [-3, 3] m/s^2; ego_lane_change requests the
  // merge manoeuvre (accepted only in the parallel section, once, with at
  // least kLaneChangeDeadline metres of lane remaining).
  std::span<const StepEvent> step(double ego_accel, bool ego_lane_change);

  // Advance one step with no controlled vehicle (warm-up, human-only runs).
  std::span<const StepEvent> step_humans();

  // Insert the ego at the ramp entry at 13 m/s. Throws if one exists.
  void insert_ego();

  // In-lane leader of a human vehicle, or the ego as a virtual leader when
  // the vehicle is cooperative, in the right highway lane, and the unmerged
  // ego is ahead of it in the parallel section with the smaller gap.
  std::optional<LeaderInfo> effective_leader(const Vehicle& v) const;

  // Once-per-second sub-steps, driven by step(); public so the rules can be
  // exercised directly on constructed states.
  void spawn_tick();
  void lane_change_tick();

  const RoadNetwork& network() const { return network_; }
  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  std::vector<Vehicle>& vehicles_mut() { return vehicles_; }
  double clock() const { return static_cast<double>(step_count_) * kDt; }
  long step_count() const { return step_count_; }
  const SpawnStats& spawn_stats() const { return stats_; }

  bool has_ego() const { return ego_id_ >= 0; }
  // Id of the ego of the current (or just-ended) episode; -1 before any.
  int episode_ego_id() const { return episode_ego_id_; }
  const Vehicle* ego() const;                    // nullptr when absent
  const Vehicle* find_vehicle(int id) const;     // nullptr when absent
  double episode_start_clock() const { return static_cast<double>(episode_start_step_) * kDt; }
  bool ego_merged() const { return ego_merged_; }
  bool lane_change_used() const { return lane_change_used_; }
  bool lane_change_active() const { return lane_change_step_ >= 0; }

  // Event history since construction (or since clear_event_log()).
  const std::vector<StepEvent>& event_log() const { return event_log_; }
  void set_event_logging(bool enabled) { log_events_ = enabled; }
  void clear_event_log() { event_log_.clear(); }

 private:
  struct EgoCommand {
    double accel = 0.0;
    bool lane_change = false;
  };

  std::span<const StepEvent> advance(const std::optional<EgoCommand>& cmd);
  void compute_accelerations(const std::optional<EgoCommand>& cmd);
  void integrate();
  void update_lane_change();
  void detect_events();
  void remove_departed();
  void try_spawn(int lane, double probability, double uncoop_fraction);
  DriverParams sample_driver(double uncoop_fraction);
  bool mobil_wants_change(const Vehicle& v, int target_lane) const;
  // straddle: treat a vehicle mid-manoeuvre as occupying both the ramp lane
  // and the right lane (used by the lane-change rule, not by car following).
  bool occupies(const Vehicle& w, int lane, bool straddle) const;
  double idm_accel_in_lane(const Vehicle& v, int as_lane, int ignore_id,
                           bool straddle) const;
  std::optional<LeaderInfo> leader_in_lane(const Vehicle& v, int lane,
                                           int ignore_id,
                                           bool straddle = false) const;
  std::optional<LeaderInfo> follower_in_lane(const Vehicle& v, int lane,
                                             int ignore_id,
                                             bool straddle = false) const;
  void push_event(EventKind kind, std::vector<int> ids);
  Vehicle* vehicle_by_id(int id);
  int index_of(int id) const;

  RoadNetwork network_;
  ScenarioConfig config_;
  util::Rng rng_;
  std::vector<Vehicle> vehicles_;
  std::vector<double> accels_;
  std::vector<StepEvent> step_events_;
  std::vector<StepEvent> event_log_;
  bool log_events_ = true;
  SpawnStats stats_;

  long step_count_ = 0;
  int next_vehicle_id_ = 1;
  int ego_id_ = -1;
  int episode_ego_id_ = -1;
  long episode_start_step_ = 0;
  bool ego_episode_done_ = true;
  bool ego_merged_ = false;
  long merge_step_ = -1;
  bool lane_change_used_ = false;
  int lane_change_step_ = -1;  // -1 idle, else steps elapsed
  int lane_change_vehicle_ = -1;
  bool lane_crossed_ = false;
  bool pending_merge_ = false;
};

}  // namespace onramp::sim
