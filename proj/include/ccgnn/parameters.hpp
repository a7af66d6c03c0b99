#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccgnn/matrix.hpp"
#include "ccgnn/tape.hpp"

namespace ccgnn {

/// Ordered collection of named trainable matrices. Order is insertion order
/// and is what checkpoints and optimizer state follow.
class ParameterSet {
 public:
  void add(std::string name, Matrix value);

  std::size_t size() const noexcept { return values_.size(); }
  bool contains(std::string_view name) const noexcept;
  std::size_t index_of(std::string_view name) const;

  const std::string& name(std::size_t i) const { return names_.at(i); }
  Matrix& value(std::size_t i) { return values_.at(i); }
  const Matrix& value(std::size_t i) const { return values_.at(i); }
  Matrix& operator[](std::string_view name) { return values_[index_of(name)]; }
  const Matrix& operator[](std::string_view name) const { return values_[index_of(name)]; }

  std::span<Matrix> values() noexcept { return values_; }
  std::span<const Matrix> values() const noexcept { return values_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::size_t scalar_count() const noexcept;

  bool operator==(const ParameterSet&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
};

/// Tape leaves for every entry of a ParameterSet, looked up by name.
class BoundParameters {
 public:
  BoundParameters(Tape& tape, const ParameterSet& set);
  /// Binds pre-existing leaves (used by gradient checks that own the leaves).
  BoundParameters(const ParameterSet& set, std::vector<NodeId> ids);

  NodeId operator[](std::string_view name) const { return ids_[set_->index_of(name)]; }
  std::span<const NodeId> ids() const noexcept { return ids_; }

  /// Gradients in ParameterSet order.
  std::vector<Matrix> collect(const Gradients& grads) const;

 private:
  const ParameterSet* set_;
  std::vector<NodeId> ids_;
};

}  // namespace ccgnn
