#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace onramp::util {

// SplitMix64 step; used for deriving independent seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stable seed derivation: every consumer of randomness gets its own stream
// derived from (base, index). Nested calls give per-run / per-env /
// per-episode hierarchies.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 1));
}

// Deterministic random source. mt19937_64 is fully specified by the
// standard, and the distributions are implemented here because the std::
// distribution adaptors are implementation-defined and would break
// bit-reproducibility across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller without the cached spare so state stays minimal.
  double normal(double mean, double stddev) {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Resamples until the draw is strictly positive.
  double positive_normal(double mean, double stddev) {
    double v = normal(mean, stddev);
    while (v <= 0.0) v = normal(mean, stddev);
    return v;
  }

  // Uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace onramp::util
