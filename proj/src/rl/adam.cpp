#include "onramp/rl/adam.hpp"

namespace onramp::rl {

double clip_grad_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (const double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (double& g : grad) g *= scale;
  }
  return norm;
}

}  // namespace onramp::rl
