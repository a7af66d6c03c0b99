#include "ccgnn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ccgnn/kernels.hpp"

namespace ccgnn {
namespace {

[[noreturn]] void shape_fail(OpKind kind, const Matrix& a, const Matrix& b) {
  throw ShapeError(std::string(op_name(kind)) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

[[noreturn]] void shape_fail(OpKind kind, const Matrix& a, std::string_view why) {
  throw ShapeError(std::string(op_name(kind)) + ": " + std::string(why) + " (got " + a.shape_string() + ")");
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void accumulate(std::optional<Matrix>& slot, const Matrix& g) {
  if (!slot) {
    slot = g;
    return;
  }
  kernels::active().axpy(1.0, g.data(), slot->data());
}

Matrix elementwise(const Matrix& a, const Matrix& b,
                   void (*op)(std::span<const double>, std::span<const double>, std::span<double>)) {
  Matrix out(a.rows(), a.cols());
  op(a.data(), b.data(), out.data());
  return out;
}

constexpr double kDegenerateRelTol = 1e-12;

}  // namespace

std::string_view op_name(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::Leaf: return "leaf";
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Hadamard: return "hadamard";
    case OpKind::Scale: return "scale";
    case OpKind::AddRowBias: return "add_row_bias";
    case OpKind::ConcatCols: return "concat_cols";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Tanh: return "tanh";
    case OpKind::LeakyRelu: return "leaky_relu";
    case OpKind::Transpose: return "transpose";
    case OpKind::SquaredNorm: return "squared_norm";
    case OpKind::Trace: return "trace";
    case OpKind::ColumnStandardize: return "column_standardize";
    case OpKind::BlockMatMul: return "block_matmul";
    case OpKind::MemoryScan: return "memory_scan";
  }
  return "unknown";
}

StandardizeResult column_standardize(const Matrix& m) {
  if (m.rows() < 2) throw ShapeError("column_standardize: needs at least 2 rows (got " + m.shape_string() + ")");
  StandardizeResult res{Matrix(m.rows(), m.cols()), {}};
  const std::size_t n = m.rows();
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    double raw = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      mean += m(r, c);
      raw += m(r, c) * m(r, c);
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (m(r, c) - mean) * (m(r, c) - mean);
    const double norm = std::sqrt(ss);
    if (norm == 0.0 || norm <= kDegenerateRelTol * std::sqrt(raw)) {
      res.degenerate_columns.push_back(c);
      continue;
    }
    for (std::size_t r = 0; r < n; ++r) res.values(r, c) = (m(r, c) - mean) / norm;
  }
  return res;
}

Matrix memory_scan(const Matrix& omega, const Matrix& gate, const Matrix& init, std::size_t segment_length) {
  if (!omega.same_shape(gate)) shape_fail(OpKind::MemoryScan, omega, gate);
  if (init.rows() != 1 || init.cols() != omega.cols()) shape_fail(OpKind::MemoryScan, omega, init);
  if (segment_length == 0 || omega.rows() % segment_length != 0) {
    shape_fail(OpKind::MemoryScan, omega, "row count must be a multiple of the segment length");
  }
  const std::size_t f = omega.cols();
  Matrix out(omega.rows(), f);
  for (std::size_t n = 0; n < omega.rows(); ++n) {
    const auto prev = (n % segment_length == 0) ? init.row(0) : out.row(n - 1);
    auto dst = out.row(n);
    const auto w = omega.row(n);
    const auto g = gate.row(n);
    for (std::size_t j = 0; j < f; ++j) dst[j] = w[j] + g[j] * prev[j];
  }
  return out;
}

Matrix block_matmul(const Matrix& blocks, const Matrix& x) {
  const std::size_t b = blocks.cols();
  if (blocks.rows() % b != 0) shape_fail(OpKind::BlockMatMul, blocks, "blocks must stack square matrices");
  if (blocks.rows() != x.rows()) shape_fail(OpKind::BlockMatMul, blocks, x);
  const std::size_t f = x.cols();
  Matrix out(x.rows(), f);
  const auto& k = kernels::active();
  for (std::size_t s = 0; s < x.rows() / b; ++s) {
    k.gemm(b, f, b, blocks.data().data() + s * b * b, x.data().data() + s * b * f, out.data().data() + s * b * f,
           false);
  }
  return out;
}

bool Gradients::contains(NodeId id) const noexcept { return id.index < grads_.size() && grads_[id.index].has_value(); }

const Matrix& Gradients::at(NodeId id) const {
  if (!contains(id)) throw std::out_of_range("no gradient recorded for node " + std::to_string(id.index));
  return *grads_[id.index];
}

NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::parameter(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.parameter = true;
  n.needs_grad = true;
  return push(std::move(n));
}

const Tape::Node& Tape::node(NodeId id) const {
  if (id.index >= nodes_.size()) throw std::out_of_range("tape node " + std::to_string(id.index) + " does not exist");
  return nodes_[id.index];
}

const Matrix& Tape::value(NodeId id) const { return node(id).value; }
OpKind Tape::kind(NodeId id) const { return node(id).kind; }
bool Tape::is_parameter(NodeId id) const { return node(id).parameter; }

std::vector<NodeId> Tape::parameters() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].parameter) out.push_back(NodeId{static_cast<std::uint32_t>(i)});
  return out;
}

NodeId Tape::block_matmul(NodeId blocks, NodeId x) {
  return apply(OpKind::BlockMatMul, std::array{blocks, x}, {.block = value(blocks).cols()});
}

NodeId Tape::memory_scan(NodeId omega, NodeId gate, NodeId init, std::size_t segment_length) {
  return apply(OpKind::MemoryScan, std::array{omega, gate, init}, {.block = segment_length});
}

Matrix Tape::forward(OpKind kind, std::span<const Matrix* const> in, const OpAttrs& attrs, bool* degenerate) const {
  const auto& k = kernels::active();
  switch (kind) {
    case OpKind::MatMul: {
      const Matrix& a = *in[0];
      const Matrix& b = *in[1];
      if (a.cols() != b.rows()) shape_fail(kind, a, b);
      return ccgnn::matmul(a, b);
    }
    case OpKind::Add:
    case OpKind::Sub:
    case OpKind::Hadamard: {
      const Matrix& a = *in[0];
      const Matrix& b = *in[1];
      if (!a.same_shape(b)) shape_fail(kind, a, b);
      return elementwise(a, b, kind == OpKind::Add ? k.add : kind == OpKind::Sub ? k.sub : k.mul);
    }
    case OpKind::Scale: {
      Matrix out(in[0]->rows(), in[0]->cols());
      k.scale(attrs.scalar, in[0]->data(), out.data());
      return out;
    }
    case OpKind::AddRowBias: {
      const Matrix& a = *in[0];
      const Matrix& b = *in[1];
      if (b.rows() != 1 || b.cols() != a.cols()) shape_fail(kind, a, b);
      Matrix out = a;
      for (std::size_t r = 0; r < a.rows(); ++r) k.add(out.row(r), b.row(0), out.row(r));
      return out;
    }
    case OpKind::ConcatCols: {
      if (in[0]->rows() != in[1]->rows()) shape_fail(kind, *in[0], *in[1]);
      return hstack(*in[0], *in[1]);
    }
    case OpKind::Sigmoid:
    case OpKind::Tanh:
    case OpKind::LeakyRelu: {
      Matrix out(in[0]->rows(), in[0]->cols());
      const auto src = in[0]->data();
      auto dst = out.data();
      if (kind == OpKind::Sigmoid) {
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = sigmoid_scalar(src[i]);
      } else if (kind == OpKind::Tanh) {
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::tanh(src[i]);
      } else {
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : attrs.scalar * src[i];
      }
      return out;
    }
    case OpKind::Transpose:
      return in[0]->transposed();
    case OpKind::SquaredNorm:
      return Matrix::scalar(k.dot(in[0]->data(), in[0]->data()));
    case OpKind::Trace: {
      const Matrix& a = *in[0];
      if (a.rows() != a.cols()) shape_fail(kind, a, "trace needs a square matrix");
      double s = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
      return Matrix::scalar(s);
    }
    case OpKind::ColumnStandardize: {
      auto res = column_standardize(*in[0]);
      if (degenerate != nullptr) *degenerate = res.warning();
      return std::move(res.values);
    }
    case OpKind::BlockMatMul:
      return ccgnn::block_matmul(*in[0], *in[1]);
    case OpKind::MemoryScan:
      return ccgnn::memory_scan(*in[0], *in[1], *in[2], attrs.block);
    case OpKind::Leaf:
      break;
  }
  throw std::invalid_argument("unsupported primitive kind: " + std::string(op_name(kind)));
}

NodeId Tape::apply(OpKind kind, std::span<const NodeId> inputs, OpAttrs attrs) {
  std::size_t expected = 0;
  switch (kind) {
    case OpKind::Scale:
    case OpKind::Sigmoid:
    case OpKind::Tanh:
    case OpKind::LeakyRelu:
    case OpKind::Transpose:
    case OpKind::SquaredNorm:
    case OpKind::Trace:
    case OpKind::ColumnStandardize:
      expected = 1;
      break;
    case OpKind::MatMul:
    case OpKind::Add:
    case OpKind::Sub:
    case OpKind::Hadamard:
    case OpKind::AddRowBias:
    case OpKind::ConcatCols:
    case OpKind::BlockMatMul:
      expected = 2;
      break;
    case OpKind::MemoryScan:
      expected = 3;
      break;
    case OpKind::Leaf:
    default:
      throw std::invalid_argument("unsupported primitive kind: " + std::string(op_name(kind)));
  }
  if (inputs.size() != expected) {
    throw std::invalid_argument(std::string(op_name(kind)) + ": expected " + std::to_string(expected) +
                                " inputs, got " + std::to_string(inputs.size()));
  }
  Node n;
  n.kind = kind;
  n.arity = static_cast<std::uint8_t>(expected);
  n.attrs = attrs;
  std::array<const Matrix*, 3> vals{};
  for (std::size_t i = 0; i < expected; ++i) {
    const Node& src = node(inputs[i]);
    n.inputs[i] = inputs[i];
    n.needs_grad = n.needs_grad || src.needs_grad;
    vals[i] = &src.value;
  }
  bool degenerate = false;
  n.value = forward(kind, std::span<const Matrix* const>(vals.data(), expected), attrs, &degenerate);
  standardize_warning_ = standardize_warning_ || degenerate;
  return push(std::move(n));
}

std::vector<Matrix> Tape::replay() const {
  std::vector<Matrix> values;
  values.reserve(nodes_.size());
  for (const Node& n : nodes_) {
    if (n.kind == OpKind::Leaf) {
      values.push_back(n.value);
      continue;
    }
    std::array<const Matrix*, 3> vals{};
    for (std::size_t i = 0; i < n.arity; ++i) vals[i] = &values[n.inputs[i].index];
    values.push_back(forward(n.kind, std::span<const Matrix* const>(vals.data(), n.arity), n.attrs, nullptr));
  }
  return values;
}

Gradients Tape::backward(NodeId loss) const {
  const Node& root = node(loss);
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw ShapeError("backward: loss must be 1x1, got " + root.value.shape_string());
  }
  const auto& k = kernels::active();
  std::vector<std::optional<Matrix>> g(nodes_.size());
  g[loss.index] = Matrix::scalar(1.0);

  for (std::size_t idx = loss.index + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    if (!g[idx] || n.kind == OpKind::Leaf || !n.needs_grad) continue;
    for (std::size_t i = 0; i < n.arity; ++i) {
      if (n.inputs[i].index >= idx) throw std::logic_error("tape invariant violated: node visited before its inputs");
    }
    const Matrix& G = *g[idx];
    auto in = [&](std::size_t i) -> const Node& { return nodes_[n.inputs[i].index]; };
    auto wants = [&](std::size_t i) { return in(i).needs_grad; };
    auto slot = [&](std::size_t i) -> std::optional<Matrix>& { return g[n.inputs[i].index]; };

    switch (n.kind) {
      case OpKind::MatMul:
        if (wants(0)) accumulate(slot(0), matmul_nt(G, in(1).value));
        if (wants(1)) accumulate(slot(1), matmul_tn(in(0).value, G));
        break;
      case OpKind::Add:
        if (wants(0)) accumulate(slot(0), G);
        if (wants(1)) accumulate(slot(1), G);
        break;
      case OpKind::Sub:
        if (wants(0)) accumulate(slot(0), G);
        if (wants(1)) {
          Matrix neg(G.rows(), G.cols());
          k.scale(-1.0, G.data(), neg.data());
          accumulate(slot(1), neg);
        }
        break;
      case OpKind::Hadamard:
        if (wants(0)) accumulate(slot(0), elementwise(G, in(1).value, k.mul));
        if (wants(1)) accumulate(slot(1), elementwise(G, in(0).value, k.mul));
        break;
      case OpKind::Scale: {
        Matrix d(G.rows(), G.cols());
        k.scale(n.attrs.scalar, G.data(), d.data());
        accumulate(slot(0), d);
        break;
      }
      case OpKind::AddRowBias:
        if (wants(0)) accumulate(slot(0), G);
        if (wants(1)) {
          Matrix db(1, G.cols());
          for (std::size_t r = 0; r < G.rows(); ++r) k.add(db.row(0), G.row(r), db.row(0));
          accumulate(slot(1), db);
        }
        break;
      case OpKind::ConcatCols: {
        const std::size_t left = in(0).value.cols();
        if (wants(0)) accumulate(slot(0), G.cols_range(0, left));
        if (wants(1)) accumulate(slot(1), G.cols_range(left, G.cols() - left));
        break;
      }
      case OpKind::Sigmoid:
      case OpKind::Tanh:
      case OpKind::LeakyRelu: {
        Matrix d(G.rows(), G.cols());
        const auto y = n.value.data();
        const auto x = in(0).value.data();
        const auto gd = G.data();
        auto dd = d.data();
        for (std::size_t i = 0; i < dd.size(); ++i) {
          double local = 0.0;
          if (n.kind == OpKind::Sigmoid) {
            local = y[i] * (1.0 - y[i]);
          } else if (n.kind == OpKind::Tanh) {
            local = 1.0 - y[i] * y[i];
          } else {
            local = x[i] > 0.0 ? 1.0 : n.attrs.scalar;
          }
          dd[i] = gd[i] * local;
        }
        accumulate(slot(0), d);
        break;
      }
      case OpKind::Transpose:
        accumulate(slot(0), G.transposed());
        break;
      case OpKind::SquaredNorm: {
        const Matrix& a = in(0).value;
        Matrix d(a.rows(), a.cols());
        k.scale(2.0 * G.item(), a.data(), d.data());
        accumulate(slot(0), d);
        break;
      }
      case OpKind::Trace: {
        const std::size_t dim = in(0).value.rows();
        Matrix d(dim, dim);
        for (std::size_t i = 0; i < dim; ++i) d(i, i) = G.item();
        accumulate(slot(0), d);
        break;
      }
      case OpKind::ColumnStandardize: {
        // z = c / |c| with c the centered column: dc = (g - z (z.g)) / |c|, dx = dc - mean(dc).
        const Matrix& x = in(0).value;
        const Matrix& z = n.value;
        const std::size_t rows = x.rows();
        Matrix d(rows, x.cols());
        for (std::size_t c = 0; c < x.cols(); ++c) {
          double mean = 0.0;
          for (std::size_t r = 0; r < rows; ++r) mean += x(r, c);
          mean /= static_cast<double>(rows);
          double ss = 0.0;
          double raw = 0.0;
          double zg = 0.0;
          for (std::size_t r = 0; r < rows; ++r) {
            ss += (x(r, c) - mean) * (x(r, c) - mean);
            raw += x(r, c) * x(r, c);
            zg += z(r, c) * G(r, c);
          }
          const double norm = std::sqrt(ss);
          if (norm == 0.0 || norm <= kDegenerateRelTol * std::sqrt(raw)) continue;
          double dmean = 0.0;
          for (std::size_t r = 0; r < rows; ++r) {
            d(r, c) = (G(r, c) - z(r, c) * zg) / norm;
            dmean += d(r, c);
          }
          dmean /= static_cast<double>(rows);
          for (std::size_t r = 0; r < rows; ++r) d(r, c) -= dmean;
        }
        accumulate(slot(0), d);
        break;
      }
      case OpKind::BlockMatMul: {
        const Matrix& blocks = in(0).value;
        const Matrix& x = in(1).value;
        const std::size_t b = blocks.cols();
        const std::size_t segs = x.rows() / b;
        if (wants(1)) {
          std::vector<Matrix> parts;
          parts.reserve(segs);
          for (std::size_t s = 0; s < segs; ++s) {
            parts.push_back(matmul_tn(blocks.block_rows(s * b, b), G.block_rows(s * b, b)));
          }
          accumulate(slot(1), vstack(parts));
        }
        if (wants(0)) {
          std::vector<Matrix> parts;
          parts.reserve(segs);
          for (std::size_t s = 0; s < segs; ++s) {
            parts.push_back(matmul_nt(G.block_rows(s * b, b), x.block_rows(s * b, b)));
          }
          accumulate(slot(0), vstack(parts));
        }
        break;
      }
      case OpKind::MemoryScan: {
        const Matrix& gate = in(1).value;
        const Matrix& init = in(2).value;
        const Matrix& out = n.value;
        const std::size_t seg = n.attrs.block;
        const std::size_t f = out.cols();
        Matrix d_omega(out.rows(), f);
        Matrix d_gate(out.rows(), f);
        Matrix d_init(1, f);
        std::vector<double> carry(f, 0.0);
        for (std::size_t r = out.rows(); r-- > 0;) {
          const bool first = (r % seg == 0);
          const auto prev = first ? init.row(0) : out.row(r - 1);
          for (std::size_t j = 0; j < f; ++j) {
            const double total = G(r, j) + carry[j];
            d_omega(r, j) = total;
            d_gate(r, j) = total * prev[j];
            carry[j] = total * gate(r, j);
          }
          if (first) {
            for (std::size_t j = 0; j < f; ++j) {
              d_init(0, j) += carry[j];
              carry[j] = 0.0;
            }
          }
        }
        if (wants(0)) accumulate(slot(0), d_omega);
        if (wants(1)) accumulate(slot(1), d_gate);
        if (wants(2)) accumulate(slot(2), d_init);
        break;
      }
      case OpKind::Leaf:
        break;
    }
  }

  Gradients out;
  out.grads_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].parameter) continue;
    out.grads_[i] = g[i] ? std::move(*g[i]) : Matrix(nodes_[i].value.rows(), nodes_[i].value.cols());
  }
  return out;
}

}  // namespace ccgnn
