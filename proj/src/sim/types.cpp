#include "onramp/sim/types.hpp"

namespace onramp::sim {

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::kCollision: return "collision";
    case EventKind::kEgoMerged: return "ego_merged";
    case EventKind::kEgoTimeout: return "ego_timeout";
    case EventKind::kSpawn: return "spawn";
    case EventKind::kHardBrake: return "hard_brake";
  }
  return "unknown";
}

}  // namespace onramp::sim
