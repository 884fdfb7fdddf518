#pragma once

namespace onramp::sim {

// Global lane indices along the shared longitudinal axis.
inline constexpr int kRampLane = 0;   // taper + parallel merging lane
inline constexpr int kRightLane = 1;  // rightmost highway lane
inline constexpr int kLeftLane = 2;

// Two-lane highway with a taper-style ramp feeding a parallel-style merging
// lane. Everything lives on one longitudinal axis: the highway spans
// [0, 500] m, the taper [75, 150) m, the parallel lane [150, 350) m. The
// parallel lane ends at merge_end_x.
struct RoadNetwork {
  double taper_length = 75.0;
  double parallel_length = 200.0;
  double upstream_highway_length = 150.0;
  double downstream_highway_length = 150.0;
  int highway_lane_count = 2;
  double lane_width = 3.2;
  double merge_end_x = 350.0;

  double highway_start_x() const { return 0.0; }
  double parallel_start_x() const { return merge_end_x - parallel_length; }
  double ramp_entry_x() const { return parallel_start_x() - taper_length; }
  double highway_end_x() const { return merge_end_x + downstream_highway_length; }

  bool in_parallel_section(double x) const {
    return x >= parallel_start_x() && x < merge_end_x;
  }
};

RoadNetwork build_network();

}  // namespace onramp::sim
