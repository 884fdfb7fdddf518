#pragma once

#include <cstdint>

#include "onramp/env/env.hpp"
#include "onramp/rl/adam.hpp"
#include "onramp/rl/network.hpp"
#include "onramp/rl/ppo.hpp"  // TrainCallbacks / EvalResult / UpdateRecord

namespace onramp::rl {

struct DQNConfig {
  double learning_rate = 1e-4;
  int buffer_capacity = 100'000;
  int batch_size = 64;
  long target_sync_interval = 10'000;  // steps
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_fraction = 0.1;  // anneal over this fraction of training
  double gamma = 0.99;
  long total_timesteps = 1'000'000;
  long learn_start = 1'000;  // steps before updates begin
  int train_interval = 1;    // gradient step every N env steps
  long eval_interval = 100'000;
  long log_interval = 10'000;
  std::uint64_t seed = 0;
};

struct DQNState {
  PolicyNetwork qnet;    // outputs = Q-values, no value head
  PolicyNetwork target;
  AdamState adam;
  long timestep = 0;
};

DQNState make_dqn_state(const DQNConfig& cfg, int obs_dim, int n_actions);

// Standard deep Q-learning with a replay buffer, target network and
// epsilon-greedy exploration over the same discrete action set.
void dqn_train(DQNState& state, env::Env& env, const DQNConfig& cfg,
               const TrainCallbacks& callbacks);

}  // namespace onramp::rl
