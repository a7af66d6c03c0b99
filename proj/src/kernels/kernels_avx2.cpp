// Compiled with -mavx2 -mfma. Only reached through the dispatch table after
// a CPUID check, so nothing here may be inlined into generic code.

#include "ccgnn/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace ccgnn::kernels {
namespace {

// Register-blocked 4x8 micro-kernel; accumulation over p runs in the same
// order as the scalar reference, so results differ only by FMA rounding.
void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
               bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = a + (i + 0) * k;
    const double* a1 = a + (i + 1) * k;
    const double* a2 = a + (i + 2) * k;
    const double* a3 = a + (i + 3) * k;
    double* c0 = c + (i + 0) * n;
    double* c1 = c + (i + 1) * n;
    double* c2 = c + (i + 2) * n;
    double* c3 = c + (i + 3) * n;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d c00 = _mm256_loadu_pd(c0 + j), c01 = _mm256_loadu_pd(c0 + j + 4);
      __m256d c10 = _mm256_loadu_pd(c1 + j), c11 = _mm256_loadu_pd(c1 + j + 4);
      __m256d c20 = _mm256_loadu_pd(c2 + j), c21 = _mm256_loadu_pd(c2 + j + 4);
      __m256d c30 = _mm256_loadu_pd(c3 + j), c31 = _mm256_loadu_pd(c3 + j + 4);
      for (std::size_t p = 0; p < k; ++p) {
        const double* bp = b + p * n + j;
        const __m256d b0 = _mm256_loadu_pd(bp);
        const __m256d b1 = _mm256_loadu_pd(bp + 4);
        __m256d av = _mm256_broadcast_sd(a0 + p);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_broadcast_sd(a1 + p);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_broadcast_sd(a2 + p);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_broadcast_sd(a3 + p);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
      }
      _mm256_storeu_pd(c0 + j, c00);
      _mm256_storeu_pd(c0 + j + 4, c01);
      _mm256_storeu_pd(c1 + j, c10);
      _mm256_storeu_pd(c1 + j + 4, c11);
      _mm256_storeu_pd(c2 + j, c20);
      _mm256_storeu_pd(c2 + j + 4, c21);
      _mm256_storeu_pd(c3 + j, c30);
      _mm256_storeu_pd(c3 + j + 4, c31);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d r0 = _mm256_loadu_pd(c0 + j), r1 = _mm256_loadu_pd(c1 + j);
      __m256d r2 = _mm256_loadu_pd(c2 + j), r3 = _mm256_loadu_pd(c3 + j);
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d bv = _mm256_loadu_pd(b + p * n + j);
        r0 = _mm256_fmadd_pd(_mm256_broadcast_sd(a0 + p), bv, r0);
        r1 = _mm256_fmadd_pd(_mm256_broadcast_sd(a1 + p), bv, r1);
        r2 = _mm256_fmadd_pd(_mm256_broadcast_sd(a2 + p), bv, r2);
        r3 = _mm256_fmadd_pd(_mm256_broadcast_sd(a3 + p), bv, r3);
      }
      _mm256_storeu_pd(c0 + j, r0);
      _mm256_storeu_pd(c1 + j, r1);
      _mm256_storeu_pd(c2 + j, r2);
      _mm256_storeu_pd(c3 + j, r3);
    }
    for (; j < n; ++j) {
      double s0 = c0[j], s1 = c1[j], s2 = c2[j], s3 = c3[j];
      for (std::size_t p = 0; p < k; ++p) {
        const double bv = b[p * n + j];
        s0 = std::fma(a0[p], bv, s0);
        s1 = std::fma(a1[p], bv, s1);
        s2 = std::fma(a2[p], bv, s2);
        s3 = std::fma(a3[p], bv, s3);
      }
      c0[j] = s0;
      c1[j] = s1;
      c2[j] = s2;
      c3[j] = s3;
    }
  }
  for (; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d av = _mm256_broadcast_sd(arow + p);
      const double* brow = b + p * n;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        _mm256_storeu_pd(crow + j, _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + j), _mm256_loadu_pd(crow + j)));
      }
      for (; j < n; ++j) crow[j] = std::fma(arow[p], brow[j], crow[j]);
    }
  }
}

template <class VecOp, class ScalarOp>
inline void binary_op(std::span<const double> x, std::span<const double> y, std::span<double> out, VecOp vop,
                      ScalarOp sop) {
  const std::size_t n = out.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out.data() + i, vop(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i)));
  }
  for (; i < n; ++i) out[i] = sop(x[i], y[i]);
}

void add_avx2(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  binary_op(x, y, out, [](__m256d a, __m256d b) { return _mm256_add_pd(a, b); },
            [](double a, double b) { return a + b; });
}

void sub_avx2(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  binary_op(x, y, out, [](__m256d a, __m256d b) { return _mm256_sub_pd(a, b); },
            [](double a, double b) { return a - b; });
}

void mul_avx2(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  binary_op(x, y, out, [](__m256d a, __m256d b) { return _mm256_mul_pd(a, b); },
            [](double a, double b) { return a * b; });
}

void axpy_avx2(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = y.size();
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y.data() + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale_avx2(double alpha, std::span<const double> x, std::span<double> out) {
  const std::size_t n = out.size();
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(av, _mm256_loadu_pd(x.data() + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

double dot_avx2(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + i + 4), _mm256_loadu_pd(y.data() + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i), s0);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(s0, s1));
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

constexpr KernelTable kAvx2{
    "avx2", gemm_avx2, add_avx2, sub_avx2, mul_avx2, axpy_avx2, scale_avx2, dot_avx2,
};

}  // namespace

const KernelTable* avx2_table() noexcept { return &kAvx2; }

}  // namespace ccgnn::kernels

#else

namespace ccgnn::kernels {
const KernelTable* avx2_table() noexcept { return nullptr; }
}  // namespace ccgnn::kernels

#endif
