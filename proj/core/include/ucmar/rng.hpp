#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ucmar {

// Deterministic random source. std::mt19937_64 output is pinned by the
// standard, and every distribution below is built from it with explicit
// arithmetic, so identical seeds give identical streams on any platform
// (the std::*_distribution adapters do not guarantee that).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive. Rejection sampling, unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next_u64());  // full span
    std::uint64_t mask = range - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    std::uint64_t v;
    do {
      v = next_u64() & mask;
    } while (v >= range);
    return lo + static_cast<std::int64_t>(v);
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Poisson draw. Exact multiplicative scheme for small means, rounded
  /// Gaussian for large ones (relative error negligible above the switch).
  std::int64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      const double limit = std::exp(-mean);
      double prod = 1.0;
      std::int64_t k = 0;
      do {
        ++k;
        prod *= uniform();
      } while (prod > limit);
      return k - 1;
    }
    const double draw = mean + std::sqrt(mean) * normal();
    return draw <= 0.0 ? 0 : static_cast<std::int64_t>(std::llround(draw));
  }

  /// Derives an independent sub-seed (splitmix64 over seed/stream). Used to
  /// hand each sample or epoch its own generator instance.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace ucmar
