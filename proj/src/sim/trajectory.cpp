#include "onramp/sim/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace onramp::sim {

void TrajectoryRecorder::record(const Simulation& sim) {
  char line[160];
  for (const auto& v : sim.vehicles()) {
    const double lateral = sim.network().lane_width * v.lane + v.y_offset;
    std::snprintf(line, sizeof(line), "%.1f,%d,%d,%.6f,%.6f,%.6f,%.6f\n",
                  sim.clock(), v.id, v.lane, v.x, lateral, v.speed, v.last_accel);
    buffer_ += line;
  }
}

void TrajectoryRecorder::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trajectory file: " + path);
  out << buffer_;
}

}  // namespace onramp::sim
