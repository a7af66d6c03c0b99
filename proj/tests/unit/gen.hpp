#pragma once

// Hand-rolled generators for property tests. Every case is reproducible from
// (suite seed, case index), and the index is printed on failure via CAPTURE.

#include <cstddef>
#include <cstdint>
#include <functional>

#include "ccgnn/matrix.hpp"
#include "ccgnn/rng.hpp"

namespace gen {

using ccgnn::Matrix;
using ccgnn::Rng;

inline std::size_t size_in(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(ccgnn::uniform01(rng) * static_cast<double>(hi - lo + 1));
}

inline double real_in(Rng& rng, double lo, double hi) { return ccgnn::uniform(rng, lo, hi); }

inline Matrix matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  return ccgnn::random_normal(rows, cols, scale, rng);
}

/// Mixes in a few exact zeros and repeated values, which tend to hit ties
/// and boundary branches.
inline Matrix lumpy_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m = matrix(rng, rows, cols);
  for (double& v : m.data()) {
    const double u = ccgnn::uniform01(rng);
    if (u < 0.1) v = 0.0;
    else if (u < 0.2) v = 1.0;
  }
  return m;
}

inline void for_cases(std::uint64_t seed, int count, const std::function<void(Rng&, int)>& body) {
  for (int i = 0; i < count; ++i) {
    Rng rng(ccgnn::derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    body(rng, i);
  }
}

}  // namespace gen
