#pragma once

// Portable randomness helpers. Standard distributions are implementation
// defined, so anything that must reproduce across platforms goes through
// these instead.

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace varcat {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed for a named stage derived from the run seed.
inline std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) {
  return splitmix64(seed ^ fnv1a64(stage));
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Fisher-Yates permutation of 0..n-1 driven by mt19937_64 (whose output
/// sequence is fixed by the standard).
inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace varcat
