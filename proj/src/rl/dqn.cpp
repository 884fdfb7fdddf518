#include "onramp/rl/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace onramp::rl {

namespace {
constexpr std::uint64_t kDomainDqnInit = 5;
constexpr std::uint64_t kDomainDqnExplore = 6;
constexpr std::uint64_t kDomainDqnReplay = 7;
constexpr std::uint64_t kDomainDqnEpisode = 8;

struct ReplayBuffer {
  int capacity;
  int obs_dim;
  int size = 0;
  int head = 0;
  std::vector<double> obs, next_obs;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;

  ReplayBuffer(int cap, int dim) : capacity(cap), obs_dim(dim) {
    obs.assign(static_cast<std::size_t>(cap) * dim, 0.0);
    next_obs.assign(static_cast<std::size_t>(cap) * dim, 0.0);
    actions.assign(cap, 0);
    rewards.assign(cap, 0.0);
    dones.assign(cap, 0);
  }

  void push(std::span<const double> s, int a, double r, std::span<const double> s2,
            bool done) {
    std::copy(s.begin(), s.end(), obs.begin() + static_cast<std::size_t>(head) * obs_dim);
    std::copy(s2.begin(), s2.end(),
              next_obs.begin() + static_cast<std::size_t>(head) * obs_dim);
    actions[head] = a;
    rewards[head] = r;
    dones[head] = done ? 1 : 0;
    head = (head + 1) % capacity;
    size = std::min(size + 1, capacity);
  }

  std::span<const double> obs_at(int i) const {
    return {obs.data() + static_cast<std::size_t>(i) * obs_dim,
            static_cast<std::size_t>(obs_dim)};
  }
  std::span<const double> next_obs_at(int i) const {
    return {next_obs.data() + static_cast<std::size_t>(i) * obs_dim,
            static_cast<std::size_t>(obs_dim)};
  }
};

int argmax(std::span<const double> q) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(q.size()); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return best;
}

}  // namespace

DQNState make_dqn_state(const DQNConfig& cfg, int obs_dim, int n_actions) {
  NetworkShape shape;
  shape.input = obs_dim;
  shape.outputs = n_actions;
  shape.value_head = false;
  util::Rng init_rng(util::split_seed(cfg.seed, kDomainDqnInit));
  DQNState state;
  state.qnet = PolicyNetwork::initialize(shape, init_rng);
  state.target = state.qnet;
  state.adam = AdamState(state.qnet.parameter_count());
  return state;
}

void dqn_train(DQNState& state, env::Env& env, const DQNConfig& cfg,
               const TrainCallbacks& callbacks) {
  const int obs_dim = env.observation_size();
  const int n_actions = env.action_count();

  ReplayBuffer replay(cfg.buffer_capacity, obs_dim);
  util::Rng explore_rng(util::split_seed(cfg.seed, kDomainDqnExplore));
  util::Rng replay_rng(util::split_seed(cfg.seed, kDomainDqnReplay));
  const std::uint64_t episode_domain = util::split_seed(cfg.seed, kDomainDqnEpisode);

  std::vector<double> obs(obs_dim), next_obs(obs_dim);
  long episode_counter = 0;
  env.reset(util::split_seed(episode_domain, episode_counter++), obs);

  double episode_reward = 0.0;
  double reward_window_sum = 0.0;
  int reward_window_count = 0;
  PolicyNetwork::Workspace ws, ws_target;
  std::vector<double> grad(state.qnet.parameter_count());
  std::vector<double> dq(n_actions);
  long last_eval = state.timestep;
  long last_log = state.timestep;
  const long anneal_steps =
      std::max<long>(1, static_cast<long>(cfg.epsilon_fraction *
                                          static_cast<double>(cfg.total_timesteps)));

  while (state.timestep < cfg.total_timesteps) {
    const double frac = std::min(1.0, static_cast<double>(state.timestep) /
                                          static_cast<double>(anneal_steps));
    const double epsilon =
        cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start);

    int action;
    if (explore_rng.uniform01() < epsilon) {
      action = static_cast<int>(explore_rng.below(static_cast<std::uint64_t>(n_actions)));
    } else {
      state.qnet.forward(obs, ws);
      action = argmax(ws.logits);
    }

    const auto result = env.step(action, next_obs);
    replay.push(obs, action, result.reward, next_obs, result.done);
    episode_reward += result.reward;
    ++state.timestep;

    if (result.done) {
      reward_window_sum += episode_reward;
      ++reward_window_count;
      episode_reward = 0.0;
      env.reset(util::split_seed(episode_domain, episode_counter++), obs);
    } else {
      std::copy(next_obs.begin(), next_obs.end(), obs.begin());
    }

    if (replay.size >= cfg.learn_start && state.timestep % cfg.train_interval == 0) {
      std::fill(grad.begin(), grad.end(), 0.0);
      const double scale = 1.0 / static_cast<double>(cfg.batch_size);
      for (int k = 0; k < cfg.batch_size; ++k) {
        const int i =
            static_cast<int>(replay_rng.below(static_cast<std::uint64_t>(replay.size)));
        state.target.forward(replay.next_obs_at(i), ws_target);
        const double q_next = *std::max_element(ws_target.logits.begin(),
                                                ws_target.logits.end());
        const double y = replay.rewards[i] +
                         cfg.gamma * q_next * (replay.dones[i] ? 0.0 : 1.0);
        state.qnet.forward(replay.obs_at(i), ws);
        const double q = ws.logits[replay.actions[i]];
        std::fill(dq.begin(), dq.end(), 0.0);
        dq[replay.actions[i]] = 2.0 * (q - y) * scale;  // d/dq of (q - y)^2 / B
        state.qnet.backward(ws, dq, 0.0, grad);
      }
      state.adam.step(state.qnet.parameters(), grad, cfg.learning_rate);
    }

    if (state.timestep % cfg.target_sync_interval == 0) {
      state.target.parameters() = state.qnet.parameters();
    }

    if (callbacks.on_update && state.timestep - last_log >= cfg.log_interval) {
      last_log = state.timestep;
      UpdateRecord rec;
      rec.timestep = state.timestep;
      rec.update_index = state.timestep / cfg.log_interval;
      rec.episodes = reward_window_count;
      rec.mean_episode_reward =
          reward_window_count > 0
              ? reward_window_sum / reward_window_count
              : std::numeric_limits<double>::quiet_NaN();
      reward_window_sum = 0.0;
      reward_window_count = 0;
      callbacks.on_update(rec);
    }

    if (callbacks.evaluate && state.timestep - last_eval >= cfg.eval_interval) {
      last_eval = state.timestep;
      const EvalResult res = callbacks.evaluate(state.qnet, state.timestep);
      if (callbacks.on_eval) callbacks.on_eval(state.timestep, res);
      if (callbacks.on_checkpoint) {
        callbacks.on_checkpoint(state.qnet, state.adam, state.timestep);
      }
    }
  }

  if (callbacks.on_checkpoint) {
    callbacks.on_checkpoint(state.qnet, state.adam, state.timestep);
  }
}

}  // namespace onramp::rl
