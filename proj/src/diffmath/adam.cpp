#include "ccgnn/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ccgnn {

AdamState AdamState::for_parameters(std::span<const Matrix> params) {
  AdamState s;
  s.first_moment.reserve(params.size());
  s.second_moment.reserve(params.size());
  for (const auto& p : params) {
    s.first_moment.emplace_back(p.rows(), p.cols());
    s.second_moment.emplace_back(p.rows(), p.cols());
  }
  return s;
}

void adam_step(std::span<Matrix> params, std::span<const Matrix> grads, AdamState& state, double learning_rate,
               double weight_decay) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw ShapeError("adam_step: parameter, gradient and state counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].same_shape(grads[i]) || !params[i].same_shape(state.first_moment[i]) ||
        !params[i].same_shape(state.second_moment[i])) {
      throw ShapeError("adam_step: shape mismatch for parameter " + std::to_string(i) + ": " +
                       params[i].shape_string() + " vs gradient " + grads[i].shape_string());
    }
  }
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("adam_step: learning rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("adam_step: weight decay must be >= 0");

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  const double decay = 1.0 - learning_rate * weight_decay;

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].data();
    const auto g = grads[i].data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      p[j] = p[j] * decay - learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace ccgnn
