#include "onramp/rl/rollout.hpp"

#include <cmath>

namespace onramp::rl {

RolloutBuffer::RolloutBuffer(int n_envs, int horizon, int obs_dim)
    : n_envs_(n_envs), horizon_(horizon), obs_dim_(obs_dim) {
  const std::size_t n = static_cast<std::size_t>(n_envs) * horizon;
  obs.assign(n * obs_dim, 0.0);
  actions.assign(n, 0);
  logprobs.assign(n, 0.0);
  rewards.assign(n, 0.0);
  values.assign(n, 0.0);
  dones.assign(n, 0);
  bootstrap_values.assign(n_envs, 0.0);
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
}

void RolloutBuffer::compute_gae(double gamma, double lambda) {
  for (int e = 0; e < n_envs_; ++e) {
    double gae = 0.0;
    for (int t = horizon_ - 1; t >= 0; --t) {
      const int i = index(e, t);
      const double not_done = dones[i] ? 0.0 : 1.0;
      const double next_value =
          (t == horizon_ - 1) ? bootstrap_values[e] : values[index(e, t + 1)];
      const double delta = rewards[i] + gamma * next_value * not_done - values[i];
      gae = delta + gamma * lambda * not_done * gae;
      advantages[i] = gae;
      returns[i] = gae + values[i];
    }
  }
}

void RolloutBuffer::normalize_advantages() {
  const int n = size();
  if (n == 0) return;
  double mean = 0.0;
  for (const double a : advantages) mean += a;
  mean /= n;
  double var = 0.0;
  for (const double a : advantages) var += (a - mean) * (a - mean);
  var /= n;
  const double inv = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : advantages) a = (a - mean) * inv;
}

}  // namespace onramp::rl
