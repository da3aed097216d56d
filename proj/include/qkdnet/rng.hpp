#pragma once

#include <cmath>
#include <cstdint>

namespace qkdnet {

/// Small counter-friendly PRNG (splitmix64 core). Streams derived from
/// (seed, salt, index) are statistically independent, which lets the
/// simulator hand out one stream per pulse slot and stay deterministic
/// no matter how the slot range is partitioned.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  /// Stream keyed by (seed, salt, index); salt separates purposes
  /// (Alice choices, Bob choices, dark counts, ...).
  static Rng stream(std::uint64_t seed, std::uint64_t salt, std::uint64_t index) {
    return Rng(mix(mix(seed ^ 0x243f6a8885a308d3ULL * salt) ^ index));
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller; draws exactly two uniforms.
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

 private:
  std::uint64_t state_;
};

}  // namespace qkdnet
