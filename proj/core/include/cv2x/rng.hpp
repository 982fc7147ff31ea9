#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cv2x {

using Rng = std::mt19937_64;

/// Stateless 64-bit mixer (SplitMix64 finalizer).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Generator for the named substream of a master seed. Distinct names give
/// independent streams, so consuming one never perturbs another.
Rng make_stream(std::uint64_t master_seed, std::string_view name);

/// The run's substreams.
struct RngStreams {
  Rng mobility;
  Rng shadowing;
  Rng sps;
  Rng harq;
  Rng app;

  explicit RngStreams(std::uint64_t master_seed);
};

/// Uniform integer in [lo, hi].
template <typename Int>
Int uniform_int(Rng& rng, Int lo, Int hi) {
  return std::uniform_int_distribution<Int>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace cv2x
