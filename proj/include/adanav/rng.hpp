#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace adanav {

// Deterministic random source. std::mt19937_64 has a fully specified output
// sequence, and all derived draws below are implemented here rather than with
// std::uniform_*_distribution (whose output is implementation-defined), so a
// seed reproduces the same byte stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], rejection-sampled to avoid modulo bias.
  int uniform_int(int lo, int hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
    const std::uint64_t range = static_cast<std::uint64_t>(hi) - lo + 1;
    const std::uint64_t reject_below = (-range) % range;  // 2^64 mod range
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= reject_below) return lo + static_cast<int>(x % range);
    }
  }

  // Index drawn from an unnormalized nonnegative weight vector by inverse CDF.
  int sample_categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace adanav
