#include "ccgnn/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ccgnn {

double invariance_term(const ViewPair& v) {
  if (!v.z_a.same_shape(v.z_b)) {
    throw ShapeError("invariance_term: " + v.z_a.shape_string() + " vs " + v.z_b.shape_string());
  }
  double s = 0.0;
  for (std::size_t i = 0; i < v.z_a.size(); ++i) {
    const double d = v.z_a.data()[i] - v.z_b.data()[i];
    s += d * d;
  }
  return s;
}

double decorrelation_term(const Matrix& z) {
  const std::size_t d = z.cols();
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double g = 0.0;
      for (std::size_t r = 0; r < z.rows(); ++r) g += z(r, i) * z(r, j);
      const double e = g - (i == j ? 1.0 : 0.0);
      s += e * e;
    }
  }
  return s;
}

double pearson_offdiag_oracle(const Matrix& raw) {
  const std::size_t n = raw.rows();
  const std::size_t d = raw.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < n; ++r) mean[c] += raw(r, c);
    mean[c] /= static_cast<double>(n);
  }
  auto cov = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += (raw(r, a) - mean[a]) * (raw(r, b) - mean[b]);
    return s / static_cast<double>(n);
  };
  std::vector<double> var(d);
  for (std::size_t c = 0; c < d; ++c) {
    var[c] = cov(c, c);
    if (!(var[c] > 0.0)) throw std::invalid_argument("pearson_offdiag_oracle: column " + std::to_string(c) + " has zero variance");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) continue;
      const double r = cov(i, j) / std::sqrt(var[i] * var[j]);
      total += r * r;
    }
  }
  return total;
}

double cca_loss(const ViewPair& v, const CcaConfig& cfg) {
  if (cfg.lambda < 0.0) throw std::invalid_argument("cca_loss: lambda must be non-negative");
  return invariance_term(v) + cfg.lambda * (decorrelation_term(v.z_a) + decorrelation_term(v.z_b));
}

CcaLossNodes cca_loss(Tape& tape, NodeId z_a, NodeId z_b, const CcaConfig& cfg) {
  if (cfg.lambda < 0.0) throw std::invalid_argument("cca_loss: lambda must be non-negative");
  const NodeId inv = tape.squared_norm(tape.sub(z_a, z_b));
  const NodeId eye = tape.constant(Matrix::identity(tape.value(z_a).cols()));
  auto dec = [&](NodeId z) { return tape.squared_norm(tape.sub(tape.matmul(tape.transpose(z), z), eye)); };
  const NodeId dec_sum = tape.add(dec(z_a), dec(z_b));
  const NodeId total = tape.add(inv, tape.scale(dec_sum, cfg.lambda));
  return {total, inv, dec_sum};
}

HeadParams HeadParams::init(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
  return HeadParams{glorot_uniform(in_dim, out_dim, rng), Matrix(1, out_dim)};
}

Matrix reconstruct(const Matrix& z_a, const Matrix& z_v, const HeadParams& p) {
  const Matrix features = hstack(z_a, z_v);
  if (features.cols() != p.weight.rows() || p.bias.cols() != p.weight.cols() || p.bias.rows() != 1) {
    throw ShapeError("reconstruct: features " + features.shape_string() + ", weight " + p.weight.shape_string() +
                     ", bias " + p.bias.shape_string());
  }
  Matrix out = matmul(features, p.weight);
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += p.bias(0, c);
  return out;
}

NodeId reconstruct(Tape& tape, NodeId features, NodeId weight, NodeId bias) {
  return tape.add_row_bias(tape.matmul(features, weight), bias);
}

double mse(const Matrix& pred, const Matrix& target) {
  if (!pred.same_shape(target)) throw ShapeError("mse: " + pred.shape_string() + " vs " + target.shape_string());
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - target.data()[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

NodeId mse(Tape& tape, NodeId pred, NodeId target) {
  const auto& p = tape.value(pred);
  const auto& t = tape.value(target);
  if (!p.same_shape(t)) throw ShapeError("mse: " + p.shape_string() + " vs " + t.shape_string());
  return tape.scale(tape.squared_norm(tape.sub(pred, target)), 1.0 / static_cast<double>(p.size()));
}

}  // namespace ccgnn
