#pragma once

#include <cmath>
#include <cstdint>

namespace tsr {

/// Deterministic 64-bit generator (splitmix64 core).
///
/// std::mt19937 with std::*_distribution is avoided on purpose: the standard
/// leaves distribution output unspecified, so results would differ between
/// standard libraries.  This generator produces bit-identical streams on every
/// platform, which the synthetic data tools and the trainer rely on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.  lo must not exceed hi.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    // Multiply-shift rejection-free mapping is fine here: span is tiny
    // compared to 2^64, so the bias is far below anything observable.
    const unsigned __int128 prod =
        static_cast<unsigned __int128>(next_u64()) * span;
    return lo + static_cast<std::int64_t>(prod >> 64);
  }

  /// Standard normal via Box-Muller (no cached second value, so streams stay
  /// easy to reason about when calls are interleaved).
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double gaussian(double mean, double sigma) {
    return mean + sigma * gaussian();
  }

 private:
  std::uint64_t state_;
};

}  // namespace tsr
