#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace onramp::rl {

// Fixed-size on-policy experience store, laid out env-major
// (index = env * horizon + step) so parallel and sequential collection fill
// identical buffers.
class RolloutBuffer {
 public:
  RolloutBuffer(int n_envs, int horizon, int obs_dim);

  int n_envs() const { return n_envs_; }
  int horizon() const { return horizon_; }
  int obs_dim() const { return obs_dim_; }
  int size() const { return n_envs_ * horizon_; }

  int index(int env, int step) const { return env * horizon_ + step; }
  std::span<double> obs_at(int env, int step) {
    return {obs.data() + static_cast<std::size_t>(index(env, step)) * obs_dim_,
            static_cast<std::size_t>(obs_dim_)};
  }
  std::span<const double> obs_row(int flat_index) const {
    return {obs.data() + static_cast<std::size_t>(flat_index) * obs_dim_,
            static_cast<std::size_t>(obs_dim_)};
  }

  // delta_t = r_t + gamma*V(s_{t+1})*(1-done_t) - V(s_t)
  // A_t = delta_t + gamma*lambda*(1-done_t)*A_{t+1}
  // returns_t = A_t + V(s_t)
  void compute_gae(double gamma, double lambda);

  // Zero mean, unit variance over the whole buffer (applied once per update).
  void normalize_advantages();

  std::vector<double> obs;
  std::vector<int> actions;
  std::vector<double> logprobs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  std::vector<double> bootstrap_values;  // V(s_horizon) per env
  std::vector<double> advantages;
  std::vector<double> returns;

 private:
  int n_envs_;
  int horizon_;
  int obs_dim_;
};

}  // namespace onramp::rl
