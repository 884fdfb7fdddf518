#pragma once

#include <optional>
#include <string>

#include "onramp/rl/adam.hpp"
#include "onramp/rl/network.hpp"

namespace onramp::rl {

inline constexpr int kCheckpointFormatVersion = 1;

// Self-describing text checkpoint: format version, network kind and layer
// shapes, then row-major parameters as hexadecimal floating point (which
// round-trips bit-exactly). Optionally carries the optimizer state and the
// training step for resumption.
struct Checkpoint {
  std::string kind = "policy";  // "policy" or "qnet"
  PolicyNetwork net;
  std::optional<AdamState> adam;
  long timestep = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace onramp::rl
