#include "onramp/rl/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace onramp::rl {

namespace {

// Orthonormalizes the columns (m >= n) or rows (m < n) of a row-major m x n
// Gaussian matrix in place via modified Gram-Schmidt, then applies `gain`.
void orthogonalize(std::vector<double>& a, int m, int n, double gain,
                   util::Rng& rng) {
  for (auto& x : a) x = rng.normal(0.0, 1.0);
  const bool by_columns = m >= n;
  const int vecs = by_columns ? n : m;
  const int dim = by_columns ? m : n;
  auto at = [&](int vec, int k) -> double& {
    return by_columns ? a[static_cast<std::size_t>(k) * n + vec]
                      : a[static_cast<std::size_t>(vec) * n + k];
  };
  for (int j = 0; j < vecs; ++j) {
    for (int i = 0; i < j; ++i) {
      double dot = 0.0;
      for (int k = 0; k < dim; ++k) dot += at(i, k) * at(j, k);
      for (int k = 0; k < dim; ++k) at(j, k) -= dot * at(i, k);
    }
    double norm = 0.0;
    for (int k = 0; k < dim; ++k) norm += at(j, k) * at(j, k);
    norm = std::sqrt(std::max(norm, 1e-12));
    for (int k = 0; k < dim; ++k) at(j, k) /= norm;
  }
  for (auto& x : a) x *= gain;
}

}  // namespace

PolicyNetwork::PolicyNetwork(const NetworkShape& shape) : shape_(shape) {
  build_layout();
}

void PolicyNetwork::build_layout() {
  trunk_.clear();
  std::size_t offset = 0;
  int in = shape_.input;
  for (const int width : shape_.hidden) {
    Layer l;
    l.in = in;
    l.out = width;
    l.w_offset = offset;
    offset += static_cast<std::size_t>(width) * in;
    l.b_offset = offset;
    offset += width;
    trunk_.push_back(l);
    in = width;
  }
  policy_head_ = Layer{offset, offset + static_cast<std::size_t>(shape_.outputs) * in,
                       in, shape_.outputs};
  offset = policy_head_.b_offset + shape_.outputs;
  if (shape_.value_head) {
    value_head_ = Layer{offset, offset + static_cast<std::size_t>(in), in, 1};
    offset = value_head_.b_offset + 1;
  } else {
    value_head_ = Layer{};
  }
  params_.assign(offset, 0.0);
}

PolicyNetwork PolicyNetwork::initialize(const NetworkShape& shape, util::Rng& rng) {
  PolicyNetwork net(shape);
  std::vector<double> block;
  auto init_layer = [&](const Layer& l, double gain) {
    block.assign(static_cast<std::size_t>(l.out) * l.in, 0.0);
    orthogonalize(block, l.out, l.in, gain, rng);
    std::copy(block.begin(), block.end(), net.params_.begin() + l.w_offset);
    // biases stay zero
  };
  for (const auto& l : net.trunk_) init_layer(l, std::sqrt(2.0));
  init_layer(net.policy_head_, 0.01);
  if (shape.value_head) init_layer(net.value_head_, 1.0);
  return net;
}

void PolicyNetwork::forward(std::span<const double> input, Workspace& ws) const {
  if (static_cast<int>(input.size()) != shape_.input) {
    throw std::invalid_argument("forward: input size mismatch");
  }
  const std::size_t n_layers = trunk_.size();
  ws.acts.resize(n_layers + 1);
  ws.pre.resize(n_layers);
  ws.acts[0].assign(input.begin(), input.end());

  for (std::size_t li = 0; li < n_layers; ++li) {
    const Layer& l = trunk_[li];
    auto& pre = ws.pre[li];
    auto& act = ws.acts[li + 1];
    pre.assign(l.out, 0.0);
    act.assign(l.out, 0.0);
    const double* w = params_.data() + l.w_offset;
    const double* b = params_.data() + l.b_offset;
    const double* in = ws.acts[li].data();
    for (int o = 0; o < l.out; ++o) {
      double sum = b[o];
      const double* row = w + static_cast<std::size_t>(o) * l.in;
      for (int i = 0; i < l.in; ++i) sum += row[i] * in[i];
      pre[o] = sum;
      act[o] = sum > 0.0 ? sum : 0.0;
    }
  }

  const auto& feat = ws.acts[n_layers];
  ws.logits.assign(shape_.outputs, 0.0);
  {
    const Layer& l = policy_head_;
    const double* w = params_.data() + l.w_offset;
    const double* b = params_.data() + l.b_offset;
    for (int o = 0; o < l.out; ++o) {
      double sum = b[o];
      const double* row = w + static_cast<std::size_t>(o) * l.in;
      for (int i = 0; i < l.in; ++i) sum += row[i] * feat[i];
      ws.logits[o] = sum;
    }
  }
  ws.value = 0.0;
  if (shape_.value_head) {
    const Layer& l = value_head_;
    const double* w = params_.data() + l.w_offset;
    double sum = params_[l.b_offset];
    for (int i = 0; i < l.in; ++i) sum += w[i] * feat[i];
    ws.value = sum;
  }
}

PolicyNetwork::Output PolicyNetwork::forward(std::span<const double> input) const {
  Workspace ws;
  forward(input, ws);
  return Output{ws.logits, ws.value};
}

void PolicyNetwork::backward(Workspace& ws, std::span<const double> dlogits,
                             double dvalue, std::span<double> grad) const {
  if (grad.size() != params_.size()) {
    throw std::invalid_argument("backward: gradient buffer size mismatch");
  }
  const std::size_t n_layers = trunk_.size();
  const auto& feat = ws.acts[n_layers];
  const int feat_dim = static_cast<int>(feat.size());

  // Heads
  auto& delta = ws.delta;
  delta.assign(feat_dim, 0.0);
  {
    const Layer& l = policy_head_;
    const double* w = params_.data() + l.w_offset;
    for (int o = 0; o < l.out; ++o) {
      const double d = dlogits[o];
      if (d == 0.0) continue;
      double* grow = grad.data() + l.w_offset + static_cast<std::size_t>(o) * l.in;
      const double* row = w + static_cast<std::size_t>(o) * l.in;
      for (int i = 0; i < l.in; ++i) {
        grow[i] += d * feat[i];
        delta[i] += d * row[i];
      }
      grad[l.b_offset + o] += d;
    }
  }
  if (shape_.value_head && dvalue != 0.0) {
    const Layer& l = value_head_;
    const double* w = params_.data() + l.w_offset;
    double* grow = grad.data() + l.w_offset;
    for (int i = 0; i < l.in; ++i) {
      grow[i] += dvalue * feat[i];
      delta[i] += dvalue * w[i];
    }
    grad[l.b_offset] += dvalue;
  }

  // Trunk, back to front
  auto& delta_next = ws.delta_next;
  for (int li = static_cast<int>(n_layers) - 1; li >= 0; --li) {
    const Layer& l = trunk_[li];
    const auto& pre = ws.pre[li];
    const auto& in = ws.acts[li];
    delta_next.assign(l.in, 0.0);
    const double* w = params_.data() + l.w_offset;
    for (int o = 0; o < l.out; ++o) {
      if (pre[o] <= 0.0) continue;  // ReLU gate
      const double d = delta[o];
      if (d == 0.0) continue;
      double* grow = grad.data() + l.w_offset + static_cast<std::size_t>(o) * l.in;
      const double* row = w + static_cast<std::size_t>(o) * l.in;
      for (int i = 0; i < l.in; ++i) {
        grow[i] += d * in[i];
        delta_next[i] += d * row[i];
      }
      grad[l.b_offset + o] += d;
    }
    std::swap(delta, delta_next);
  }
}

void softmax(std::span<const double> logits, std::span<double> probs) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - m);
    sum += probs[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) probs[i] /= sum;
}

double log_sum_exp(std::span<const double> values) {
  const double m = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (const double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

}  // namespace onramp::rl
