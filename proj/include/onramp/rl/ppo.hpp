#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "onramp/env/env.hpp"
#include "onramp/rl/adam.hpp"
#include "onramp/rl/network.hpp"
#include "onramp/rl/rollout.hpp"
#include "onramp/util/rng.hpp"

namespace onramp::util {
class ThreadPool;
}

namespace onramp::rl {

struct PPOConfig {
  double learning_rate = 3e-4;
  int horizon = 2048;        // steps per environment per update
  int minibatch_size = 64;
  int epochs = 10;
  double gamma = 0.99;
  double clip_epsilon = 0.2;
  double value_coef = 0.5;   // c1
  double entropy_coef = 0.0; // c2
  double gae_lambda = 0.95;
  int n_envs = 20;
  long total_timesteps = 15'000'000;
  double max_grad_norm = 0.5;
  long eval_interval = 100'000;  // timesteps between eval-hook calls
  int n_threads = 1;
  std::uint64_t seed = 0;
};

struct UpdateStats {
  double actor_objective = 0.0;
  double value_mse = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;
};

struct UpdateRecord {
  long timestep = 0;
  long update_index = 0;
  int episodes = 0;                  // episodes completed during the rollout
  double mean_episode_reward = 0.0;  // NaN when no episode finished
  UpdateStats stats;
};

struct EvalResult {
  double mean_episode_reward = 0.0;
  double collision_pct = 0.0;
};

struct TrainCallbacks {
  std::function<void(const UpdateRecord&)> on_update;
  std::function<EvalResult(const PolicyNetwork&, long timestep)> evaluate;
  std::function<void(long timestep, const EvalResult&)> on_eval;
  std::function<void(const PolicyNetwork&, const AdamState&, long timestep)>
      on_checkpoint;
};

struct TrainState {
  PolicyNetwork net;
  AdamState adam;
  long timestep = 0;
  long update_index = 0;
};

// View over one batch of transitions (flat observation storage).
struct SampleBatch {
  std::span<const double> obs;  // size n * obs_dim
  std::span<const int> actions;
  std::span<const double> logprobs_old;
  std::span<const double> advantages;
  std::span<const double> returns;
  int obs_dim = 0;
  int count() const { return static_cast<int>(actions.size()); }
};

// Mean clipped-surrogate objective
//   mean_i [ min(z*A, clip(z, 1-eps, 1+eps)*A) - c1*(V - R)^2 + c2*H ]
// and its gradient with respect to the parameters (accumulated into `grad`,
// which must be zeroed by the caller). Returns the objective value. With a
// pool, samples are processed in contiguous blocks reduced in block order.
double ppo_objective_and_grad(const PolicyNetwork& net, const SampleBatch& batch,
                              const PPOConfig& cfg, std::span<double> grad,
                              UpdateStats* stats = nullptr,
                              util::ThreadPool* pool = nullptr);

// One PPO update: `epochs` passes of shuffled minibatches with gradient
// ascent on the objective (Adam, global gradient-norm clip). Advantages must
// already be computed and normalized. Throws on a non-finite loss.
UpdateStats ppo_update(PolicyNetwork& net, AdamState& adam, const RolloutBuffer& buffer,
                       const PPOConfig& cfg, util::Rng& shuffle_rng);

TrainState make_train_state(const PPOConfig& cfg, int obs_dim, int n_actions);

// Alternates rollout collection over the given environments with PPO updates
// until cfg.total_timesteps have been consumed (continues from
// state.timestep when resuming). Environments are stepped concurrently when
// cfg.n_threads > 1; the buffer layout makes parallel and sequential
// collection identical.
void ppo_train(TrainState& state, std::span<env::Env* const> envs,
               const PPOConfig& cfg, const TrainCallbacks& callbacks);

// Greedy action (argmax over policy logits).
int greedy_action(const PolicyNetwork& net, std::span<const double> obs);

// Samples from the categorical softmax distribution; returns the action and
// its log-probability.
std::pair<int, double> sample_action(const PolicyNetwork& net,
                                     std::span<const double> obs, util::Rng& rng,
                                     PolicyNetwork::Workspace& ws);

}  // namespace onramp::rl
