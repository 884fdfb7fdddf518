#include "onramp/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "onramp/util/thread_pool.hpp"

namespace onramp::rl {

namespace {

// Seed-split domains; every consumer of randomness hangs off the master
// seed through these (documented in the README).
constexpr std::uint64_t kDomainEpisode = 1;  // per-env episode seeds
constexpr std::uint64_t kDomainAction = 2;   // per-env action sampling
constexpr std::uint64_t kDomainShuffle = 3;  // minibatch shuffling
constexpr std::uint64_t kDomainInit = 4;     // network initialization

// Per-minibatch gradients are accumulated in this fixed number of contiguous
// blocks reduced in block order, so the arithmetic is identical no matter
// how many threads execute the blocks.
constexpr int kGradBlocks = 8;

struct SampleGrad {
  double objective = 0.0;
  double actor = 0.0;
  double value_mse = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clipped = 0.0;
};

// Objective terms and parameter gradient for one sample; grad accumulated
// with weight `scale` (1/batch for a mean).
SampleGrad sample_objective_grad(const PolicyNetwork& net,
                                 std::span<const double> obs, int action,
                                 double logp_old, double advantage,
                                 double return_target, const PPOConfig& cfg,
                                 double scale, PolicyNetwork::Workspace& ws,
                                 std::vector<double>& dlogits,
                                 std::span<double> grad) {
  net.forward(obs, ws);
  const int n_actions = static_cast<int>(ws.logits.size());
  const double lse = log_sum_exp(ws.logits);

  const double logp = ws.logits[action] - lse;
  const double z = std::exp(logp - logp_old);
  const double surr_raw = z * advantage;
  const double z_clipped = std::clamp(z, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
  const double surr_clip = z_clipped * advantage;
  const bool take_raw = surr_raw <= surr_clip;
  const double actor = std::min(surr_raw, surr_clip);

  double entropy = 0.0;
  dlogits.assign(n_actions, 0.0);
  // probs and entropy from log-space for stability
  for (int i = 0; i < n_actions; ++i) {
    const double lp = ws.logits[i] - lse;
    const double p = std::exp(lp);
    entropy -= p * lp;
    dlogits[i] = -p;  // placeholder, finished below
  }

  // d(actor)/dlogits: zero when the clip branch is active (constant in z).
  if (take_raw) {
    const double coeff = advantage * z;
    for (int i = 0; i < n_actions; ++i) dlogits[i] *= coeff;  // -coeff * p_i
    dlogits[action] += coeff;
  } else {
    std::fill(dlogits.begin(), dlogits.end(), 0.0);
  }
  // + c2 * dH/dlogits, dH/dl_j = -p_j (log p_j + H)
  if (cfg.entropy_coef != 0.0) {
    for (int i = 0; i < n_actions; ++i) {
      const double lp = ws.logits[i] - lse;
      dlogits[i] += cfg.entropy_coef * (-std::exp(lp) * (lp + entropy));
    }
  }

  const double vdiff = ws.value - return_target;
  const double dvalue = -2.0 * cfg.value_coef * vdiff;

  for (int i = 0; i < n_actions; ++i) dlogits[i] *= scale;
  net.backward(ws, dlogits, dvalue * scale, grad);

  SampleGrad out;
  out.actor = actor;
  out.value_mse = vdiff * vdiff;
  out.entropy = entropy;
  out.objective = actor - cfg.value_coef * out.value_mse + cfg.entropy_coef * entropy;
  out.approx_kl = (z - 1.0) - (logp - logp_old);
  out.clipped = (z < 1.0 - cfg.clip_epsilon || z > 1.0 + cfg.clip_epsilon) ? 1.0 : 0.0;
  return out;
}

struct BlockAccum {
  SampleGrad sums;
  std::vector<double> grad;
};

}  // namespace

double ppo_objective_and_grad(const PolicyNetwork& net, const SampleBatch& batch,
                              const PPOConfig& cfg, std::span<double> grad,
                              UpdateStats* stats, util::ThreadPool* pool) {
  const int n = batch.count();
  if (n == 0) throw std::invalid_argument("ppo_objective_and_grad: empty batch");
  const double scale = 1.0 / static_cast<double>(n);

  const int blocks = std::min(kGradBlocks, n);
  std::vector<BlockAccum> accum(blocks);
  for (auto& a : accum) a.grad.assign(net.parameter_count(), 0.0);

  auto run_block = [&](int b) {
    const int lo = static_cast<int>(static_cast<long>(n) * b / blocks);
    const int hi = static_cast<int>(static_cast<long>(n) * (b + 1) / blocks);
    PolicyNetwork::Workspace ws;
    std::vector<double> dlogits;
    for (int i = lo; i < hi; ++i) {
      const auto obs = batch.obs.subspan(static_cast<std::size_t>(i) * batch.obs_dim,
                                         batch.obs_dim);
      const SampleGrad g = sample_objective_grad(
          net, obs, batch.actions[i], batch.logprobs_old[i], batch.advantages[i],
          batch.returns[i], cfg, scale, ws, dlogits, accum[b].grad);
      accum[b].sums.objective += g.objective;
      accum[b].sums.actor += g.actor;
      accum[b].sums.value_mse += g.value_mse;
      accum[b].sums.entropy += g.entropy;
      accum[b].sums.approx_kl += g.approx_kl;
      accum[b].sums.clipped += g.clipped;
    }
  };

  if (pool && blocks > 1) {
    pool->run(blocks, run_block);
  } else {
    for (int b = 0; b < blocks; ++b) run_block(b);
  }

  // Fixed-order reduction keeps the result identical for a given block count.
  SampleGrad total;
  for (const auto& a : accum) {
    total.objective += a.sums.objective;
    total.actor += a.sums.actor;
    total.value_mse += a.sums.value_mse;
    total.entropy += a.sums.entropy;
    total.approx_kl += a.sums.approx_kl;
    total.clipped += a.sums.clipped;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += a.grad[i];
  }

  if (stats) {
    stats->actor_objective = total.actor * scale;
    stats->value_mse = total.value_mse * scale;
    stats->entropy = total.entropy * scale;
    stats->approx_kl = total.approx_kl * scale;
    stats->clip_fraction = total.clipped * scale;
  }
  return total.objective * scale;
}

UpdateStats ppo_update(PolicyNetwork& net, AdamState& adam,
                       const RolloutBuffer& buffer, const PPOConfig& cfg,
                       util::Rng& shuffle_rng) {
  const int n = buffer.size();
  const int obs_dim = buffer.obs_dim();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  // Scratch for gathered minibatches.
  std::vector<double> mb_obs;
  std::vector<int> mb_actions;
  std::vector<double> mb_logp, mb_adv, mb_ret;
  std::vector<double> grad(net.parameter_count());

  std::unique_ptr<util::ThreadPool> pool;
  if (cfg.n_threads > 1) pool = std::make_unique<util::ThreadPool>(cfg.n_threads);

  UpdateStats mean_stats;
  long stat_batches = 0;
  double grad_norm_sum = 0.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the dedicated shuffle stream.
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.below(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[i], order[j]);
    }
    for (int start = 0; start + cfg.minibatch_size <= n; start += cfg.minibatch_size) {
      const int b = cfg.minibatch_size;
      mb_obs.assign(static_cast<std::size_t>(b) * obs_dim, 0.0);
      mb_actions.assign(b, 0);
      mb_logp.assign(b, 0.0);
      mb_adv.assign(b, 0.0);
      mb_ret.assign(b, 0.0);
      for (int k = 0; k < b; ++k) {
        const int idx = order[start + k];
        const auto row = buffer.obs_row(idx);
        std::copy(row.begin(), row.end(), mb_obs.begin() + static_cast<std::size_t>(k) * obs_dim);
        mb_actions[k] = buffer.actions[idx];
        mb_logp[k] = buffer.logprobs[idx];
        mb_adv[k] = buffer.advantages[idx];
        mb_ret[k] = buffer.returns[idx];
      }
      SampleBatch batch{mb_obs, mb_actions, mb_logp, mb_adv, mb_ret, obs_dim};

      std::fill(grad.begin(), grad.end(), 0.0);
      UpdateStats stats;
      const double objective =
          ppo_objective_and_grad(net, batch, cfg, grad, &stats, pool.get());
      if (!std::isfinite(objective)) {
        std::ostringstream msg;
        msg << "ppo_update: non-finite objective (" << objective << ") at epoch "
            << epoch << ", minibatch offset " << start
            << "; actor=" << stats.actor_objective << " vmse=" << stats.value_mse
            << " entropy=" << stats.entropy;
        throw std::runtime_error(msg.str());
      }
      // Ascend the objective: descend its negation.
      for (double& g : grad) g = -g;
      grad_norm_sum += clip_grad_norm(grad, cfg.max_grad_norm);
      adam.step(net.parameters(), grad, cfg.learning_rate);

      mean_stats.actor_objective += stats.actor_objective;
      mean_stats.value_mse += stats.value_mse;
      mean_stats.entropy += stats.entropy;
      mean_stats.approx_kl += stats.approx_kl;
      mean_stats.clip_fraction += stats.clip_fraction;
      ++stat_batches;
    }
  }

  if (stat_batches > 0) {
    const double inv = 1.0 / static_cast<double>(stat_batches);
    mean_stats.actor_objective *= inv;
    mean_stats.value_mse *= inv;
    mean_stats.entropy *= inv;
    mean_stats.approx_kl *= inv;
    mean_stats.clip_fraction *= inv;
    mean_stats.grad_norm = grad_norm_sum * inv;
  }
  return mean_stats;
}

TrainState make_train_state(const PPOConfig& cfg, int obs_dim, int n_actions) {
  NetworkShape shape;
  shape.input = obs_dim;
  shape.outputs = n_actions;
  shape.value_head = true;
  util::Rng init_rng(util::split_seed(cfg.seed, kDomainInit));
  TrainState state;
  state.net = PolicyNetwork::initialize(shape, init_rng);
  state.adam = AdamState(state.net.parameter_count());
  return state;
}

int greedy_action(const PolicyNetwork& net, std::span<const double> obs) {
  const auto out = net.forward(obs);
  int best = 0;
  for (int i = 1; i < static_cast<int>(out.logits.size()); ++i) {
    if (out.logits[i] > out.logits[best]) best = i;
  }
  return best;
}

std::pair<int, double> sample_action(const PolicyNetwork& net,
                                     std::span<const double> obs, util::Rng& rng,
                                     PolicyNetwork::Workspace& ws) {
  net.forward(obs, ws);
  const int n = static_cast<int>(ws.logits.size());
  const double lse = log_sum_exp(ws.logits);
  const double u = rng.uniform01();
  double cum = 0.0;
  int action = n - 1;
  for (int i = 0; i < n; ++i) {
    cum += std::exp(ws.logits[i] - lse);
    if (u < cum) {
      action = i;
      break;
    }
  }
  return {action, ws.logits[action] - lse};
}

void ppo_train(TrainState& state, std::span<env::Env* const> envs,
               const PPOConfig& cfg, const TrainCallbacks& callbacks) {
  if (envs.empty()) throw std::invalid_argument("ppo_train: no environments");
  const int n_envs = static_cast<int>(envs.size());
  const int obs_dim = envs[0]->observation_size();

  struct EnvSlot {
    std::vector<double> obs;
    util::Rng action_rng{0};
    std::uint64_t episode_seed_base = 0;
    long episode_counter = 0;
    double episode_reward = 0.0;
    std::vector<double> finished_rewards;
    PolicyNetwork::Workspace ws;
  };
  std::vector<EnvSlot> slots(n_envs);
  const std::uint64_t episode_domain = util::split_seed(cfg.seed, kDomainEpisode);
  const std::uint64_t action_domain = util::split_seed(cfg.seed, kDomainAction);
  for (int e = 0; e < n_envs; ++e) {
    auto& s = slots[e];
    s.obs.assign(obs_dim, 0.0);
    s.episode_seed_base = util::split_seed(episode_domain, static_cast<std::uint64_t>(e));
    s.action_rng = util::Rng(util::split_seed(action_domain, static_cast<std::uint64_t>(e)));
    envs[e]->reset(util::split_seed(s.episode_seed_base,
                                    static_cast<std::uint64_t>(s.episode_counter++)),
                   s.obs);
  }

  RolloutBuffer buffer(n_envs, cfg.horizon, obs_dim);
  util::Rng shuffle_rng(util::split_seed(cfg.seed, kDomainShuffle));
  util::ThreadPool pool(std::max(1, cfg.n_threads));
  long last_eval = state.timestep;
  long last_checkpoint = state.timestep;

  while (state.timestep < cfg.total_timesteps) {
    pool.run(n_envs, [&](int e) {
      auto& s = slots[e];
      env::Env& env = *envs[e];
      for (int t = 0; t < cfg.horizon; ++t) {
        auto obs_slot = buffer.obs_at(e, t);
        std::copy(s.obs.begin(), s.obs.end(), obs_slot.begin());
        const auto [action, logp] = sample_action(state.net, s.obs, s.action_rng, s.ws);
        const double value = s.ws.value;
        const auto result = env.step(action, s.obs);
        const int i = buffer.index(e, t);
        buffer.actions[i] = action;
        buffer.logprobs[i] = logp;
        buffer.values[i] = value;
        buffer.rewards[i] = result.reward;
        buffer.dones[i] = result.done ? 1 : 0;
        s.episode_reward += result.reward;
        if (result.done) {
          s.finished_rewards.push_back(s.episode_reward);
          s.episode_reward = 0.0;
          env.reset(util::split_seed(s.episode_seed_base,
                                     static_cast<std::uint64_t>(s.episode_counter++)),
                    s.obs);
        }
      }
      state.net.forward(s.obs, s.ws);
      buffer.bootstrap_values[e] = s.ws.value;
    });

    state.timestep += static_cast<long>(n_envs) * cfg.horizon;
    ++state.update_index;

    buffer.compute_gae(cfg.gamma, cfg.gae_lambda);
    buffer.normalize_advantages();
    const UpdateStats stats = ppo_update(state.net, state.adam, buffer, cfg, shuffle_rng);

    UpdateRecord record;
    record.timestep = state.timestep;
    record.update_index = state.update_index;
    double reward_sum = 0.0;
    int episodes = 0;
    for (auto& s : slots) {
      for (const double r : s.finished_rewards) {
        reward_sum += r;
        ++episodes;
      }
      s.finished_rewards.clear();
    }
    record.episodes = episodes;
    record.mean_episode_reward =
        episodes > 0 ? reward_sum / episodes : std::numeric_limits<double>::quiet_NaN();
    record.stats = stats;
    if (callbacks.on_update) callbacks.on_update(record);

    if (callbacks.evaluate && state.timestep - last_eval >= cfg.eval_interval) {
      last_eval += (state.timestep - last_eval) / cfg.eval_interval * cfg.eval_interval;
      const EvalResult res = callbacks.evaluate(state.net, state.timestep);
      if (callbacks.on_eval) callbacks.on_eval(state.timestep, res);
      if (callbacks.on_checkpoint) {
        callbacks.on_checkpoint(state.net, state.adam, state.timestep);
        last_checkpoint = state.timestep;
      }
    }
  }

  if (callbacks.on_checkpoint && last_checkpoint != state.timestep) {
    callbacks.on_checkpoint(state.net, state.adam, state.timestep);
  }
}

}  // namespace onramp::rl
