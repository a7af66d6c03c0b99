#include "ccgnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ccgnn {
namespace {

double evaluate(const LossBuilder& build, const std::vector<Matrix>& params) {
  Tape tape;
  std::vector<NodeId> ids;
  ids.reserve(params.size());
  for (const auto& p : params) ids.push_back(tape.parameter(p));
  const NodeId loss = build(tape, ids);
  return tape.value(loss).item();
}

}  // namespace

GradCheckResult finite_difference_check(const LossBuilder& build, std::span<const Matrix> params, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_difference_check: step must be positive");

  Tape tape;
  std::vector<NodeId> ids;
  ids.reserve(params.size());
  for (const auto& p : params) ids.push_back(tape.parameter(p));
  const NodeId loss = build(tape, ids);
  if (tape.value(loss).rows() != 1 || tape.value(loss).cols() != 1) {
    throw ShapeError("finite_difference_check: loss must be 1x1, got " + tape.value(loss).shape_string());
  }
  const Gradients grads = tape.backward(loss);

  GradCheckResult res;
  std::vector<Matrix> work(params.begin(), params.end());
  for (std::size_t pi = 0; pi < work.size(); ++pi) {
    const Matrix& analytic = grads.at(ids[pi]);
    for (std::size_t e = 0; e < work[pi].size(); ++e) {
      const double orig = work[pi].data()[e];
      work[pi].data()[e] = orig + step;
      const double up = evaluate(build, work);
      work[pi].data()[e] = orig - step;
      const double down = evaluate(build, work);
      work[pi].data()[e] = orig;

      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic.data()[e];
      const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
      const double rel = std::abs(a - numeric) / denom;
      ++res.entries_checked;
      if (rel > res.max_relative_error || res.entries_checked == 1) {
        res.max_relative_error = rel;
        res.worst_parameter = pi;
        res.worst_entry = e;
        res.worst_analytic = a;
        res.worst_numeric = numeric;
      }
    }
  }
  return res;
}

}  // namespace ccgnn
