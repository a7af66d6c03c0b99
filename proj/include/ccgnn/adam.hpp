#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ccgnn/matrix.hpp"

namespace ccgnn {

/// Moment estimates for Adam, one pair per parameter matrix.
struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Zero moments shaped like `params`.
  static AdamState for_parameters(std::span<const Matrix> params);
};

/// One bias-corrected Adam update with decoupled weight decay:
///   p <- p * (1 - lr * wd) - lr * m_hat / (sqrt(v_hat) + eps)
/// A zero learning rate leaves parameters untouched but still advances the
/// moments and step count.
void adam_step(std::span<Matrix> params, std::span<const Matrix> grads, AdamState& state, double learning_rate,
               double weight_decay = 0.0);

}  // namespace ccgnn
