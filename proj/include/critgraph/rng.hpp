#pragma once

#include <cstdint>
#include <random>

// Seeded, portable random primitives. Every random choice in the library
// flows through std::mt19937_64 (whose output sequence is fixed by the C++
// standard) plus the two mappings below. std::uniform_int_distribution and
// friends are implementation-defined and are not used anywhere.

namespace critgraph {

using Rng = std::mt19937_64;

// splitmix64 finalizer (Steele/Lea/Flood).
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derive the seed of an independent sub-stream from a master seed and up to
// three stream tags (graph index, node id, layer, ...).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t t0,
                                 std::uint64_t t1 = 0, std::uint64_t t2 = 0) {
  std::uint64_t h = mix64(master + 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ (t0 + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (t1 + 0x3c6ef372fe94f82aULL));
  h = mix64(h ^ (t2 + 0x78dde6e5fd29f05bULL));
  return h;
}

// Unbiased integer in [0, n). Rejection keeps the mapping exact.
inline std::uint64_t rand_below(Rng& g, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = g();
    if (x >= threshold) return x % n;
  }
}

// Uniform double in [0, 1) with 53 random bits.
inline double rand_unit(Rng& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double rand_range(Rng& g, double lo, double hi) {
  return lo + (hi - lo) * rand_unit(g);
}

}  // namespace critgraph
