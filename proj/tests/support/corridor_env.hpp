#pragma once

#include <algorithm>
#include <stdexcept>

#include "onramp/env/env.hpp"

namespace onramp::testsupport {

// Deterministic 10-state corridor: start at cell 0, actions {left, right},
// -0.01 per step, +1.0 on reaching the last cell, 50-step cap. Optimal play
// takes 9 steps for a return of 0.91. One-hot observations.
class CorridorEnv : public env::Env {
 public:
  static constexpr int kCells = 10;
  static constexpr int kMaxSteps = 50;
  static constexpr double kStepPenalty = -0.01;
  static constexpr double kGoalReward = 1.0;
  static constexpr double kOptimalReturn = kGoalReward + kStepPenalty * (kCells - 1);

  int observation_size() const override { return kCells; }
  int action_count() const override { return 2; }

  void reset(std::uint64_t /*seed*/, std::span<double> obs) override {
    cell_ = 0;
    steps_ = 0;
    done_ = false;
    fill(obs);
  }

  StepResult step(int action, std::span<double> obs) override {
    if (done_) throw std::logic_error("CorridorEnv: step after done");
    if (action != 0 && action != 1) throw std::invalid_argument("bad action");
    cell_ = std::clamp(cell_ + (action == 1 ? 1 : -1), 0, kCells - 1);
    ++steps_;
    double reward = kStepPenalty;
    if (cell_ == kCells - 1) {
      reward += kGoalReward;
      done_ = true;
    } else if (steps_ >= kMaxSteps) {
      done_ = true;
    }
    if (done_) {
      const int final_cell = cell_;
      cell_ = 0;
      steps_ = 0;
      fill(obs, final_cell);
      done_ = false;
      return {reward, true};
    }
    fill(obs);
    return {reward, false};
  }

 private:
  void fill(std::span<double> obs, int mark = -1) {
    std::fill(obs.begin(), obs.end(), 0.0);
    obs[mark >= 0 ? mark : cell_] = 1.0;
  }

  int cell_ = 0;
  int steps_ = 0;
  bool done_ = false;
};

}  // namespace onramp::testsupport
