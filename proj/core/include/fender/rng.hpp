#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fender {

// Every random draw in the library goes through the helpers below instead of
// the std <random> distributions, whose draw counts are implementation
// defined. Given one mt19937_64 stream, results are reproducible across
// compilers and standard libraries.

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

// Uniform integer in [0, n). Rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(std::mt19937_64& g, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = g();
  while (x >= limit) x = g();
  return x % n;
}

inline int uniform_int(std::mt19937_64& g, int n) {
  return static_cast<int>(uniform_index(g, static_cast<std::uint64_t>(n)));
}

// Standard normal via Box-Muller (one value per two uniforms).
inline double gaussian(std::mt19937_64& g) {
  const double u1 = 1.0 - uniform01(g);  // (0, 1]
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// Knuth's product-of-uniforms sampler; fine for the basket-size scale used here.
inline int poisson(std::mt19937_64& g, double lambda) {
  const double limit = std::exp(-lambda);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform01(g);
  } while (p > limit);
  return k - 1;
}

// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(g, i)]);
  }
}

// splitmix64, used to derive independent seeds for sub-streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace fender
