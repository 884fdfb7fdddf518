#pragma once

#include <cstdint>
#include <vector>

namespace onramp::sim {

struct DriverParams {
  double desired_speed = 26.0;     // m/s
  double max_accel = 2.6;          // m/s^2
  double comfortable_decel = 4.5;  // m/s^2 (positive magnitude)
  double time_headway = 1.0;       // s
  double min_gap = 2.5;            // m
  double accel_exponent = 4.0;
  bool cooperative = true;
};

// x is the front-bumper position on the shared longitudinal axis; y_offset
// is measured from the centre of the current lane.
struct Vehicle {
  int id = 0;
  int lane = 0;
  double x = 0.0;
  double y_offset = 0.0;
  double speed = 0.0;  // >= 0 at all times
  double length = 5.0;
  DriverParams params;
  bool is_ego = false;
  double last_accel = 0.0;  // realized acceleration of the previous step

  double rear() const { return x - length; }
  double center() const { return x - 0.5 * length; }
};

enum class EventKind { kCollision, kEgoMerged, kEgoTimeout, kSpawn, kHardBrake };

struct StepEvent {
  EventKind kind;
  std::vector<int> vehicle_ids;
  double clock = 0.0;
};

const char* event_kind_name(EventKind kind);

// Per-second Bernoulli inflow model plus the cooperative/uncooperative mix
// of right-lane traffic.
struct ScenarioConfig {
  double inflow_left = 0.1;              // P(arrival) per second
  double inflow_right = 0.3;
  double uncooperative_fraction = 0.5;   // right-lane spawns only
  bool auto_spawn_ego = false;           // standalone mode: respawn the ego on its own
  std::uint64_t seed = 0;
};

struct SpawnStats {
  long right_attempts = 0;   // Bernoulli arrivals, before gap suppression
  long right_inserted = 0;
  long left_attempts = 0;
  long left_inserted = 0;
};

}  // namespace onramp::sim
