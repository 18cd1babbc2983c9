#pragma once

#include <cstdint>
#include <random>

namespace segvote {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for stream `index` under `master`: mix64(master ^ mix64(index)).
///
/// Every trial, grid point and query owns its stream, so results never
/// depend on which worker ran it.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index));
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Uniform integer in [0, n). Lemire's nearly-divisionless method, so the
/// draw sequence is fixed by this code and not by the standard library.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace segvote
