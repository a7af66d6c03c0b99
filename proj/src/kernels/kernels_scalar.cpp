#include "ccgnn/kernels.hpp"

#include <algorithm>

namespace ccgnn::kernels {
namespace {

void gemm_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
                 bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void add_scalar(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
}

void sub_scalar(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
}

void mul_scalar(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
}

void axpy_scalar(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * x[i];
}

double dot_scalar(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

constexpr KernelTable kScalar{
    "scalar", gemm_scalar, add_scalar, sub_scalar, mul_scalar, axpy_scalar, scale_scalar, dot_scalar,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace ccgnn::kernels
