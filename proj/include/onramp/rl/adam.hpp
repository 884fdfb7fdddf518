#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace onramp::rl {

// Adaptive moment estimation, beta = (0.9, 0.999), eps = 1e-8.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}

  // One descent step along `grad`.
  void step(std::span<double> params, std::span<const double> grad, double lr) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
  }
};

// Scales `grad` in place so its L2 norm does not exceed `max_norm`;
// returns the pre-clip norm.
double clip_grad_norm(std::span<double> grad, double max_norm);

}  // namespace onramp::rl
