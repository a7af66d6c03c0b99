#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "ccgnn/matrix.hpp"

namespace ccgnn {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent per-task seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = mix64(base);
  for (std::uint64_t t : tags) h = mix64(h ^ t);
  return h;
}

/// Uniform in [0, 1) from the top 53 bits; identical across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Standard normal via Box-Muller on uniform01.
double standard_normal(Rng& rng);

Matrix random_uniform(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng);
Matrix random_normal(std::size_t rows, std::size_t cols, double stddev, Rng& rng);

/// Glorot/Xavier uniform initialization for a fan_in x fan_out weight.
Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace ccgnn
