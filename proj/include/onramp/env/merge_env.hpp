#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "onramp/env/actions.hpp"
#include "onramp/env/env.hpp"
#include "onramp/env/observation.hpp"
#include "onramp/env/reward.hpp"
#include "onramp/sim/simulation.hpp"

namespace onramp::env {

enum class TerminalKind { kMerged, kCrashed, kTimeout };

const char* terminal_kind_name(TerminalKind kind);

// Quantities frozen at the merge instant, raw units. Neighbour ids are -1
// when a phantom substituted for a missing vehicle.
struct MergeSnapshot {
  double v_ego = 0.0;
  double v_t1 = 0.0;
  double v_l1 = 0.0;
  double g_t1 = 0.0;
  double g_l1 = 0.0;
  double g0 = 0.0;
  double gc = 0.0;
  int t1_id = -1;
  int l1_id = -1;
};

struct EpisodeOutcome {
  TerminalKind terminal = TerminalKind::kTimeout;
  std::optional<double> merge_clock;
  std::optional<MergeSnapshot> merge_snapshot;  // present iff merged
  double parallel_entry_clock = -1.0;           // -1 when never reached
  double end_clock = 0.0;
  int ego_id = -1;
};

struct MergeEnvConfig {
  sim::ScenarioConfig scenario;
  RewardConfig reward;
  double warmup_seconds = 60.0;
};

// Episodic MDP wrapper around the merge simulator: 14-entry observation,
// 14-action discrete control, SVO-weighted reward. Single-threaded; run one
// instance per worker.
class MergeEnv : public Env {
 public:
  explicit MergeEnv(const MergeEnvConfig& config);

  int observation_size() const override { return kObservationSize; }
  int action_count() const override { return kActionCount; }

  void reset(std::uint64_t seed, std::span<double> obs) override;
  StepResult step(int action, std::span<double> obs) override;

  Observation observe() const;

  bool episode_active() const { return active_; }
  const std::optional<EpisodeOutcome>& outcome() const { return outcome_; }
  const sim::Simulation& simulation() const { return *sim_; }

  // After a merged episode: keep simulating the (now human) traffic so
  // trailing-vehicle reactions land in the event log. Stops early on a
  // collision. No-op unless the episode ended with a merge.
  void coast(double seconds,
             const std::function<void(const sim::Simulation&)>& observer = {});

 private:
  void fill(std::span<double> out, const Observation& obs) const;

  MergeEnvConfig config_;
  std::unique_ptr<sim::Simulation> sim_;
  bool active_ = false;
  std::optional<EpisodeOutcome> outcome_;
  double parallel_entry_clock_ = -1.0;
};

}  // namespace onramp::env
