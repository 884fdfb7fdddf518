#pragma once

#include <string>

#include "onramp/sim/simulation.hpp"

namespace onramp::sim {

// Accumulates per-step vehicle rows and renders the trajectory CSV
// (clock, id, lane, x, y_offset, speed, accel). y_offset in the file is the
// lateral position measured from the ramp-lane centre, so a merging ego
// traces a smooth S from 0 to lane_width.
class TrajectoryRecorder {
 public:
  void record(const Simulation& sim);
  const std::string& csv() const { return buffer_; }
  void write(const std::string& path) const;

 private:
  std::string buffer_ = "clock,id,lane,x,y_offset,speed,accel\n";
};

}  // namespace onramp::sim
