#pragma once

#include <cstdint>
#include <random>

namespace spamsim {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to decorrelate per-shot seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream for one shot. Depends only on (master_seed, index), so
/// results do not depend on how shots are scheduled across workers.
inline Rng stream_rng(std::uint64_t master_seed, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(master_seed) ^ splitmix64(index + 1)));
}

inline double uniform01(Rng& rng) {
  return std::generate_canonical<double, 53>(rng);
}

}  // namespace spamsim
