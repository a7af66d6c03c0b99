#pragma once

// Dense arithmetic kernels behind Matrix and the differentiation tape.
//
// Every kernel has a portable scalar reference implementation. An AVX2+FMA
// variant is compiled into a separate translation unit and selected at
// runtime when the CPU supports it. Setting CCGNN_KERNELS=scalar in the
// environment forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace ccgnn::kernels {

struct KernelTable {
  std::string_view name;

  /// c[m x n] = (accumulate ? c : 0) + a[m x k] * b[k x n], row-major, contiguous.
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
               bool accumulate);

  void (*add)(std::span<const double> x, std::span<const double> y, std::span<double> out);
  void (*sub)(std::span<const double> x, std::span<const double> y, std::span<double> out);
  void (*mul)(std::span<const double> x, std::span<const double> y, std::span<double> out);
  /// y += alpha * x
  void (*axpy)(double alpha, std::span<const double> x, std::span<double> y);
  /// out = alpha * x
  void (*scale)(double alpha, std::span<const double> x, std::span<double> out);
  double (*dot)(std::span<const double> x, std::span<const double> y);
};

const KernelTable& scalar_table() noexcept;

/// AVX2 table, or nullptr when not built for this target.
const KernelTable* avx2_table() noexcept;

bool cpu_has_avx2_fma() noexcept;

/// Table used by Matrix operations and the tape. Chosen once per process.
const KernelTable& active() noexcept;

}  // namespace ccgnn::kernels
