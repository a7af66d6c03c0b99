#include "ccgnn/metrics.hpp"

#include <stdexcept>

namespace ccgnn {

const ActivationRecord& ActivationTrace::find(std::size_t layer, std::string_view modality, std::string_view name) const {
  for (const auto& r : records) {
    if (r.layer == layer && r.modality == modality && r.name == name) return r;
  }
  throw std::out_of_range("no activation record for layer " + std::to_string(layer) + " " + std::string(modality) + "/" +
                          std::string(name));
}

ActivationTrace capture_trace(const Tape& tape, const std::vector<TraceEntry>& entries) {
  ActivationTrace out;
  for (const auto& e : entries) out.records.push_back({e.layer, e.modality, e.name, e.kind, tape.value(e.node)});
  return out;
}

double default_threshold(ActivationKind kind) noexcept { return kind == ActivationKind::Gate ? 0.5 : 0.0; }

std::vector<double> firing_rates(const Matrix& activations, double threshold) {
  std::vector<double> counts(activations.cols(), 0.0);
  for (std::size_t i = 0; i < activations.rows(); ++i) {
    const auto row = activations.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] > threshold) counts[j] += 1.0;
    }
  }
  for (double& c : counts) c /= static_cast<double>(activations.rows());
  return counts;
}

std::vector<double> firing_rates(const ActivationRecord& record) {
  return firing_rates(record.values, default_threshold(record.kind));
}

double activation_auc(std::span<const double> rates) {
  if (rates.empty()) throw std::invalid_argument("activation_auc: empty rate vector");
  double sum = 0.0;
  for (double r : rates) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("activation_auc: rates must lie in [0, 1]");
    sum += r;
  }
  return sum - 0.5 * (rates.front() + rates.back());
}

}  // namespace ccgnn
