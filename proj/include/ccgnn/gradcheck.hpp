#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "ccgnn/matrix.hpp"
#include "ccgnn/tape.hpp"

namespace ccgnn {

/// Builds a scalar loss on a fresh tape from parameter leaves (one per entry
/// of the params span, in order). Must be deterministic.
using LossBuilder = std::function<NodeId(Tape& tape, std::span<const NodeId> params)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_parameter = 0;
  std::size_t worst_entry = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries_checked = 0;
};

/// Central differences with step h carry roundoff near eps * |L| / h, about
/// 1e-10 for unit-scale losses at h = 1e-6, so gradients below this floor are
/// compared on an absolute basis.
inline constexpr double kGradCheckFloor = 1e-6;

/// Compares tape gradients against central differences. Per entry the error is
/// |analytic - numeric| / max(|analytic|, |numeric|, kGradCheckFloor).
GradCheckResult finite_difference_check(const LossBuilder& build, std::span<const Matrix> params, double step);

}  // namespace ccgnn
