#pragma once

#include <span>
#include <vector>

#include "onramp/util/rng.hpp"

namespace onramp::rl {

struct NetworkShape {
  int input = 14;
  std::vector<int> hidden = {64, 64};
  int outputs = 14;        // policy logits or Q-values
  bool value_head = true;  // actor-critic networks share the trunk

  bool operator==(const NetworkShape&) const = default;
};

// Fully-connected ReLU network with a shared trunk and separate policy and
// value heads, stored as one flat parameter vector (row-major weights, then
// bias, per layer; policy head, then value head). The flat layout keeps the
// optimizer and the finite-difference checks trivial.
class PolicyNetwork {
 public:
  PolicyNetwork() = default;
  explicit PolicyNetwork(const NetworkShape& shape);  // zero-initialized

  // Orthogonal-style initialization scaled per layer (sqrt(2) on the trunk,
  // 0.01 on the policy head, 1.0 on the value head), zero biases.
  static PolicyNetwork initialize(const NetworkShape& shape, util::Rng& rng);

  const NetworkShape& shape() const { return shape_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  struct Workspace {
    std::vector<std::vector<double>> acts;    // acts[0] = input, then per layer
    std::vector<std::vector<double>> pre;     // pre-activations per hidden layer
    std::vector<double> logits;
    double value = 0.0;
    std::vector<double> delta;                // backprop scratch
    std::vector<double> delta_next;
  };

  void forward(std::span<const double> input, Workspace& ws) const;

  // Convenience forward that allocates its own workspace.
  struct Output {
    std::vector<double> logits;
    double value = 0.0;
  };
  Output forward(std::span<const double> input) const;

  // Accumulates dL/dparams into `grad` given dL/dlogits and dL/dvalue for
  // the workspace of the latest forward(). Reuses the workspace scratch.
  void backward(Workspace& ws, std::span<const double> dlogits, double dvalue,
                std::span<double> grad) const;

 private:
  struct Layer {
    std::size_t w_offset = 0;
    std::size_t b_offset = 0;
    int in = 0;
    int out = 0;
  };

  void build_layout();

  NetworkShape shape_;
  std::vector<double> params_;
  std::vector<Layer> trunk_;
  Layer policy_head_;
  Layer value_head_;
};

// Numerically stable helpers shared by the learners.
void softmax(std::span<const double> logits, std::span<double> probs);
double log_sum_exp(std::span<const double> values);

}  // namespace onramp::rl
