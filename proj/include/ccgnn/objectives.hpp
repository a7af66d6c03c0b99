#pragma once

// Canonical-correlation objective and the supervised reconstruction head.
//
//   L(Z_A, Z_B) = |Z_A - Z_B|_F^2 + lambda (|Z_A^T Z_A - I|_F^2 + |Z_B^T Z_B - I|_F^2)
//
// Views are expected to be column-standardized, so Z^T Z is a correlation
// matrix and the decorrelation term equals the summed squared off-diagonal
// Pearson coefficients.

#include "ccgnn/matrix.hpp"
#include "ccgnn/rng.hpp"
#include "ccgnn/tape.hpp"

namespace ccgnn {

struct CcaConfig {
  double lambda = 1e-4;
};

struct ViewPair {
  Matrix z_a;
  Matrix z_b;
};

double invariance_term(const ViewPair& v);
double decorrelation_term(const Matrix& z);

/// Sum over ordered pairs i != j of squared Pearson r between raw columns.
/// Throws on a zero-variance column.
double pearson_offdiag_oracle(const Matrix& raw);

double cca_loss(const ViewPair& v, const CcaConfig& cfg);

struct CcaLossNodes {
  NodeId total;
  NodeId invariance;
  NodeId decorrelation;  // sum over both views, before lambda
};

/// Differentiable objective recorded on `tape`.
CcaLossNodes cca_loss(Tape& tape, NodeId z_a, NodeId z_b, const CcaConfig& cfg);

/// Linear head mapping concatenated [Z_a, Z_v] to the 22 clean log-FB bins.
struct HeadParams {
  Matrix weight;  // (D_a + D_v) x out
  Matrix bias;    // 1 x out

  static HeadParams init(std::size_t in_dim, std::size_t out_dim, Rng& rng);
};

inline constexpr std::size_t kLogFbDim = 22;

Matrix reconstruct(const Matrix& z_a, const Matrix& z_v, const HeadParams& p);
NodeId reconstruct(Tape& tape, NodeId features, NodeId weight, NodeId bias);

/// Mean over all entries of the squared difference.
double mse(const Matrix& pred, const Matrix& target);
NodeId mse(Tape& tape, NodeId pred, NodeId target);

}  // namespace ccgnn
