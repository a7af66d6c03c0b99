#include "ccgnn/tgraph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ccgnn {

TemporalGraph::TemporalGraph(std::size_t num_nodes, std::size_t k, std::size_t segment_length, std::vector<Edge> edges)
    : num_nodes_(num_nodes), k_(k), segment_length_(segment_length), edges_(std::move(edges)) {
  if (num_nodes_ == 0) throw std::invalid_argument("TemporalGraph: zero nodes");
  if (k_ == 0) throw std::invalid_argument("TemporalGraph: k must be >= 1");
  if (segment_length_ == 0 || num_nodes_ % segment_length_ != 0) {
    throw std::invalid_argument("TemporalGraph: node count must be a multiple of the segment length");
  }
  for (const Edge& e : edges_) {
    if (e.target >= e.source || e.source >= num_nodes_ || e.source - e.target != e.distance || e.distance < 1 ||
        e.distance > k_ || e.source / segment_length_ != e.target / segment_length_) {
      throw std::invalid_argument("TemporalGraph: invalid edge (" + std::to_string(e.source) + ", " +
                                  std::to_string(e.target) + ")");
    }
  }
}

std::optional<std::size_t> TemporalGraph::distance(std::size_t i, std::size_t j) const {
  for (const Edge& e : edges_)
    if (e.source == i && e.target == j) return e.distance;
  return std::nullopt;
}

std::size_t TemporalGraph::in_degree(std::size_t i) const {
  return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [i](const Edge& e) { return e.source == i; }));
}

double edge_weight(std::size_t d, std::size_t k) {
  if (d < 1 || d > k) {
    throw std::invalid_argument("edge_weight: distance " + std::to_string(d) + " outside [1, " + std::to_string(k) + "]");
  }
  return static_cast<double>(k + 1 - d);
}

TemporalGraph build_segmented_graph(std::size_t segments, std::size_t segment_length, std::size_t k) {
  if (segments == 0 || segment_length == 0) throw std::invalid_argument("build_prior_frame_graph: zero nodes");
  if (k == 0) throw std::invalid_argument("build_prior_frame_graph: k must be >= 1");
  std::vector<Edge> edges;
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t base = s * segment_length;
    for (std::size_t local = 1; local < segment_length; ++local) {
      const std::size_t reach = std::min(local, k);
      for (std::size_t d = 1; d <= reach; ++d) {
        edges.push_back(Edge{base + local, base + local - d, d, edge_weight(d, k)});
      }
    }
  }
  return TemporalGraph(segments * segment_length, k, segment_length, std::move(edges));
}

TemporalGraph build_prior_frame_graph(std::size_t num_nodes, std::size_t k) {
  if (num_nodes == 0) throw std::invalid_argument("build_prior_frame_graph: zero nodes");
  return build_segmented_graph(1, num_nodes, k);
}

Matrix NormalizedAdjacency::dense() const {
  const std::size_t n = blocks.rows();
  Matrix out(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t base = (r / block_size) * block_size;
    for (std::size_t c = 0; c < block_size; ++c) out(r, base + c) = blocks(r, c);
  }
  return out;
}

Matrix symmetric_adjacency(const TemporalGraph& g) {
  const std::size_t n = g.num_nodes();
  Matrix a(n, n);
  for (const Edge& e : g.edges()) {
    const double w = std::max(a(e.source, e.target), e.weight);
    a(e.source, e.target) = w;
    a(e.target, e.source) = std::max(a(e.target, e.source), w);
  }
  for (std::size_t i = 0; i < n; ++i) a(i, i) = static_cast<double>(g.k());
  return a;
}

NormalizedAdjacency normalize_adjacency(const TemporalGraph& g) {
  const std::size_t b = g.segment_length();
  const std::size_t segs = g.num_segments();
  // Per-segment block of max(A, A^T) + k I; edges stay within one segment.
  Matrix blocks(g.num_nodes(), b);
  for (std::size_t r = 0; r < g.num_nodes(); ++r) blocks(r, r % b) = static_cast<double>(g.k());
  for (const Edge& e : g.edges()) {
    const std::size_t base = (e.source / b) * b;
    const std::size_t i = e.source - base;
    const std::size_t j = e.target - base;
    const double w = std::max({blocks(base + i, j), blocks(base + j, i), e.weight});
    blocks(base + i, j) = w;
    blocks(base + j, i) = w;
  }
  for (std::size_t s = 0; s < segs; ++s) {
    std::vector<double> inv_sqrt(b);
    for (std::size_t i = 0; i < b; ++i) {
      double deg = 0.0;
      for (std::size_t j = 0; j < b; ++j) deg += blocks(s * b + i, j);
      inv_sqrt[i] = 1.0 / std::sqrt(deg);
    }
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < b; ++j) blocks(s * b + i, j) *= inv_sqrt[i] * inv_sqrt[j];
  }
  return NormalizedAdjacency{b, std::move(blocks)};
}

AugmentedGraph augment_graph(const TemporalGraph& g, const Matrix& features, double p_edge, double p_feat, Rng& rng) {
  if (!(p_edge >= 0.0 && p_edge < 1.0) || !(p_feat >= 0.0 && p_feat < 1.0)) {
    throw std::invalid_argument("augment_graph: probabilities must lie in [0, 1)");
  }
  if (features.rows() != g.num_nodes()) {
    throw ShapeError("augment_graph: feature rows " + std::to_string(features.rows()) + " != node count " +
                     std::to_string(g.num_nodes()));
  }
  std::vector<Edge> kept;
  kept.reserve(g.edges().size());
  for (const Edge& e : g.edges())
    if (uniform01(rng) >= p_edge) kept.push_back(e);

  Matrix masked = features;
  for (std::size_t c = 0; c < features.cols(); ++c) {
    if (uniform01(rng) < p_feat) {
      for (std::size_t r = 0; r < features.rows(); ++r) masked(r, c) = 0.0;
    }
  }
  return AugmentedGraph{TemporalGraph(g.num_nodes(), g.k(), g.segment_length(), std::move(kept)), std::move(masked)};
}

}  // namespace ccgnn
