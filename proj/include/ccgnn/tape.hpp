#pragma once

// Record-then-replay reverse-mode differentiation over dense matrices.
//
// A Tape is an append-only list of nodes. Leaves hold constants or trainable
// parameters; every other node is one primitive applied to earlier nodes, so
// node ids are topologically ordered by construction. backward() walks the
// list once in reverse.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ccgnn/matrix.hpp"

namespace ccgnn {

struct NodeId {
  std::uint32_t index = 0;
  auto operator<=>(const NodeId&) const = default;
};

enum class OpKind : std::uint8_t {
  Leaf,
  MatMul,
  Add,
  Sub,
  Hadamard,
  Scale,
  AddRowBias,
  ConcatCols,
  Sigmoid,
  Tanh,
  LeakyRelu,
  Transpose,
  SquaredNorm,
  Trace,
  ColumnStandardize,
  BlockMatMul,
  MemoryScan,
};

std::string_view op_name(OpKind kind) noexcept;

/// Per-op scalar attributes. `scalar` is the factor for Scale and the negative
/// slope for LeakyRelu; `block` is the segment length for BlockMatMul and
/// MemoryScan.
struct OpAttrs {
  double scalar = 0.0;
  std::size_t block = 0;
};

struct StandardizeResult {
  Matrix values;
  std::vector<std::size_t> degenerate_columns;
  bool warning() const noexcept { return !degenerate_columns.empty(); }
};

/// Centers each column and scales it to unit Euclidean norm, so Z^T Z is the
/// column correlation matrix. Zero-variance columns become zero and are listed
/// in degenerate_columns. Requires rows >= 2.
StandardizeResult column_standardize(const Matrix& m);

/// Segment-wise memory recurrence: out[0] = omega[0] + gate[0] * init and
/// out[n] = omega[n] + gate[n] * out[n-1], restarting from init at every
/// multiple of segment_length.
Matrix memory_scan(const Matrix& omega, const Matrix& gate, const Matrix& init, std::size_t segment_length);

/// Applies each stacked square block of `blocks` ((S*B) x B) to the matching
/// B-row slice of x ((S*B) x F).
Matrix block_matmul(const Matrix& blocks, const Matrix& x);

class Gradients {
 public:
  bool contains(NodeId id) const noexcept;
  const Matrix& at(NodeId id) const;

 private:
  friend class Tape;
  std::vector<std::optional<Matrix>> grads_;
};

class Tape {
 public:
  NodeId constant(Matrix value);
  NodeId parameter(Matrix value);

  /// Generic entry point; the named helpers below forward here.
  NodeId apply(OpKind kind, std::span<const NodeId> inputs, OpAttrs attrs = {});

  NodeId matmul(NodeId a, NodeId b) { return apply2(OpKind::MatMul, a, b); }
  NodeId add(NodeId a, NodeId b) { return apply2(OpKind::Add, a, b); }
  NodeId sub(NodeId a, NodeId b) { return apply2(OpKind::Sub, a, b); }
  NodeId hadamard(NodeId a, NodeId b) { return apply2(OpKind::Hadamard, a, b); }
  NodeId scale(NodeId a, double factor) { return apply1(OpKind::Scale, a, {.scalar = factor}); }
  NodeId add_row_bias(NodeId a, NodeId bias) { return apply2(OpKind::AddRowBias, a, bias); }
  NodeId concat_cols(NodeId a, NodeId b) { return apply2(OpKind::ConcatCols, a, b); }
  NodeId sigmoid(NodeId a) { return apply1(OpKind::Sigmoid, a); }
  NodeId tanh(NodeId a) { return apply1(OpKind::Tanh, a); }
  NodeId leaky_relu(NodeId a, double slope) { return apply1(OpKind::LeakyRelu, a, {.scalar = slope}); }
  NodeId transpose(NodeId a) { return apply1(OpKind::Transpose, a); }
  NodeId squared_norm(NodeId a) { return apply1(OpKind::SquaredNorm, a); }
  NodeId trace(NodeId a) { return apply1(OpKind::Trace, a); }
  NodeId standardize_columns(NodeId a) { return apply1(OpKind::ColumnStandardize, a); }
  NodeId block_matmul(NodeId blocks, NodeId x);
  NodeId memory_scan(NodeId omega, NodeId gate, NodeId init, std::size_t segment_length);

  const Matrix& value(NodeId id) const;
  OpKind kind(NodeId id) const;
  bool is_parameter(NodeId id) const;
  std::size_t size() const noexcept { return nodes_.size(); }
  std::vector<NodeId> parameters() const;

  /// True once any ColumnStandardize node met a zero-variance column.
  bool standardize_warning() const noexcept { return standardize_warning_; }

  /// d(loss)/d(p) for every parameter leaf p. Parameters the loss does not
  /// depend on get a zero gradient. Throws if loss is not 1x1.
  Gradients backward(NodeId loss) const;

  /// Recomputes every non-leaf node from the recorded leaves.
  std::vector<Matrix> replay() const;

 private:
  struct Node {
    OpKind kind = OpKind::Leaf;
    std::array<NodeId, 3> inputs{};
    std::uint8_t arity = 0;
    OpAttrs attrs;
    Matrix value;
    bool parameter = false;
    bool needs_grad = false;
  };

  NodeId apply1(OpKind kind, NodeId a, OpAttrs attrs = {}) { return apply(kind, std::array{a}, attrs); }
  NodeId apply2(OpKind kind, NodeId a, NodeId b, OpAttrs attrs = {}) { return apply(kind, std::array{a, b}, attrs); }
  NodeId push(Node node);
  const Node& node(NodeId id) const;
  Matrix forward(OpKind kind, std::span<const Matrix* const> in, const OpAttrs& attrs, bool* degenerate) const;

  std::vector<Node> nodes_;
  bool standardize_warning_ = false;
};

}  // namespace ccgnn
