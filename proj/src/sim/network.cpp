#include "onramp/sim/network.hpp"

namespace onramp::sim {

RoadNetwork build_network() {
  RoadNetwork net;
  // upstream highway [0, 150), parallel [150, 350), downstream [350, 500]
  net.merge_end_x = net.upstream_highway_length + net.parallel_length;
  return net;
}

}  // namespace onramp::sim
