#include "ccgnn/parameters.hpp"

#include <algorithm>
#include <stdexcept>

namespace ccgnn {

void ParameterSet::add(std::string name, Matrix value) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
}

bool ParameterSet::contains(std::string_view name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t ParameterSet::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("unknown parameter: " + std::string(name));
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t ParameterSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

BoundParameters::BoundParameters(Tape& tape, const ParameterSet& set) : set_(&set) {
  ids_.reserve(set.size());
  for (const auto& v : set.values()) ids_.push_back(tape.parameter(v));
}

BoundParameters::BoundParameters(const ParameterSet& set, std::vector<NodeId> ids) : set_(&set), ids_(std::move(ids)) {
  if (ids_.size() != set.size()) throw std::invalid_argument("BoundParameters: id count does not match parameter set");
}

std::vector<Matrix> BoundParameters::collect(const Gradients& grads) const {
  std::vector<Matrix> out;
  out.reserve(ids_.size());
  for (NodeId id : ids_) out.push_back(grads.at(id));
  return out;
}

}  // namespace ccgnn
