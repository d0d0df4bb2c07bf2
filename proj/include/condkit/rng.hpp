#pragma once

// Seeded random sampling helpers.
//
// Built on mt19937_64 with explicit bit-to-double conversion rather than the
// standard distributions, whose output is implementation-defined. A given
// seed therefore reproduces the same stream on every platform, which the
// estimator and the benchmark protocol rely on.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "condkit/sparse.hpp"

namespace condkit {

/// Deterministically derives an independent stream seed from a base seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_in(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

/// Uniform integer in [0, bound) via rejection; no modulo bias.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
  // Reject draws below 2^64 mod bound so every residue is equally likely.
  std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = gen();
    if (r >= threshold) return r % bound;
  }
}

/// In-place Fisher-Yates shuffle with explicit draws (portable across stdlibs).
template <typename T>
void shuffle_portable(std::vector<T>& items, std::mt19937_64& gen) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(gen, i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Standard normal via Box-Muller; consumes two uniforms per draw.
inline double standard_normal(std::mt19937_64& gen) {
  double u1 = 1.0 - uniform01(gen);  // (0, 1]: keeps the log argument positive
  double u2 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Point drawn uniformly from the unit sphere in R^n (normalized Gaussians).
inline DenseVector random_unit_vector(std::size_t n, std::mt19937_64& gen) {
  DenseVector x(n);
  double norm = 0.0;
  while (norm == 0.0) {
    for (std::size_t i = 0; i < n; ++i) x[i] = standard_normal(gen);
    norm = two_norm(x);
  }
  for (std::size_t i = 0; i < n; ++i) x[i] /= norm;
  return x;
}

}  // namespace condkit
