#pragma once

#include <cstdint>
#include <random>

namespace causalforge {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; derives independent substream seeds from a base
/// seed and a stream key.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double uniform01(Rng &rng) {
  // 53 random bits in [0, 1); portable across standard libraries.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng &rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform index in [0, n).
inline std::uint64_t uniform_index(Rng &rng, std::uint64_t n) {
  // rejection keeps the draw unbiased
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Standard normal via Box-Muller, no cached state.
double standard_normal(Rng &rng);

/// |w| uniform in [lo, hi], sign flipped with probability 1/2.
inline double signed_uniform(Rng &rng, double lo, double hi) {
  const double magnitude = uniform(rng, lo, hi);
  return (rng() & 1ULL) ? -magnitude : magnitude;
}

template <typename Container> void shuffle(Container &c, Rng &rng) {
  for (auto i = c.size(); i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::swap(c[i - 1], c[j]);
  }
}

} // namespace causalforge
