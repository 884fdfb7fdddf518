#pragma once

#include <cstdint>
#include <span>

namespace onramp::env {

// Minimal episodic environment contract consumed by the learners.
class Env {
 public:
  struct StepResult {
    double reward = 0.0;
    bool done = false;
  };

  virtual ~Env() = default;

  virtual int observation_size() const = 0;
  virtual int action_count() const = 0;

  // Starts a fresh episode and writes the initial observation.
  virtual void reset(std::uint64_t seed, std::span<double> obs) = 0;

  // Applies one action and writes the next observation. After `done` the
  // environment must be reset before stepping again.
  virtual StepResult step(int action, std::span<double> obs) = 0;
};

}  // namespace onramp::env
