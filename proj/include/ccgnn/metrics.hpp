#pragma once

// Firing-rate energy proxies over recorded unit activations.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ccgnn/encoders.hpp"
#include "ccgnn/matrix.hpp"

namespace ccgnn {

/// Activation values of one layer/modality: rows are samples, columns units.
struct ActivationRecord {
  std::size_t layer = 0;
  std::string modality;
  std::string name;
  ActivationKind kind = ActivationKind::Signed;
  Matrix values;
};

struct ActivationTrace {
  std::vector<ActivationRecord> records;

  /// Throws std::out_of_range when no record matches.
  const ActivationRecord& find(std::size_t layer, std::string_view modality, std::string_view name) const;
};

/// Copies the values of every traced node out of a finished tape.
ActivationTrace capture_trace(const Tape& tape, const std::vector<TraceEntry>& entries);

/// Midpoint of the nonlinearity's range: 0.5 for gates, 0 for signed units.
double default_threshold(ActivationKind kind) noexcept;

/// Per unit, the fraction of samples whose activation exceeds `threshold`.
std::vector<double> firing_rates(const Matrix& activations, double threshold);
std::vector<double> firing_rates(const ActivationRecord& record);

/// Trapezoidal area under the rate curve over unit index (unit spacing):
/// sum(rates) - (rates.front() + rates.back()) / 2. A single unit has area 0.
double activation_auc(std::span<const double> rates);

}  // namespace ccgnn
