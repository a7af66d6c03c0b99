#pragma once

// Reference implementations used only to check the library: literal
// transcriptions with plain loops, brute-force enumerations and naive
// transforms. None of them call the library's kernels or tape.

#include <cstddef>
#include <tuple>
#include <vector>

#include "ccgnn/matrix.hpp"

namespace oracle {

using ccgnn::Matrix;

// ---- graphs ----------------------------------------------------------------

/// (i, j, d, w) for every ordered pair with 1 <= i - j <= k, found by checking
/// all N^2 pairs; sorted.
std::vector<std::tuple<std::size_t, std::size_t, std::size_t, double>> prior_frame_edges(std::size_t n, std::size_t k);

/// D^-1/2 (max(A, A^T) + k I) D^-1/2 from the brute-force edge list.
Matrix normalized_adjacency(std::size_t n, std::size_t k);

// ---- layers ----------------------------------------------------------------

Matrix product(const Matrix& a, const Matrix& b);
double sigmoid(double x);

/// act(adj X W + b), act in {identity, leaky(slope)}; `bias` may be empty (0x0
/// not representable, so pass has_bias = false).
Matrix gcn(const Matrix& adj, const Matrix& x, const Matrix& w, const Matrix* bias, double leaky_slope, bool leaky);

struct CorticalWeights {
  Matrix w_a, w_v, w_m, w_w, w_rho, w_mu;
  Matrix b_a, b_v, b_m, b_w, b_rho, b_mu;
};

struct CorticalLiteral {
  Matrix f_a, f_v, f_m, f_w, rho, omega, mu_raw, mu, h_a, h_v;
};

/// Evaluates the cortical layer equations one scalar at a time.
CorticalLiteral cortical_layer(const Matrix& h_a, const Matrix& h_v, const CorticalWeights& p, const Matrix& mu_init,
                               std::size_t segment_length);

/// mu_raw[n] = sum_{t<=n} omega[t] prod_{t<s<=n} f_m[s] + mu_init prod_{s<=n} f_m[s]
/// within each segment.
Matrix memory_scan_unrolled(const Matrix& omega, const Matrix& f_m, const Matrix& mu_init, std::size_t segment_length);

// ---- statistics ------------------------------------------------------------

/// Sum over i != j of squared Pearson r between the raw columns.
double pearson_offdiag(const Matrix& raw);

struct WilcoxonBrute {
  double w_plus = 0.0;
  double w_minus = 0.0;
  double statistic = 0.0;
  double p_lower = 0.0;
  double p_two_sided = 0.0;
  std::size_t n = 0;
};

/// Enumerates all 2^n sign assignments of the nonzero differences.
WilcoxonBrute wilcoxon(const std::vector<double>& a, const std::vector<double>& b);

// ---- signal ----------------------------------------------------------------

/// |DFT|^2 of the Hamming-windowed, zero-padded frame at bins 1..fft_size/2,
/// computed term by term.
std::vector<double> power_spectrum_naive(const std::vector<double>& frame, std::size_t fft_size);

}  // namespace oracle
