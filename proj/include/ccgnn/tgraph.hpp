#pragma once

// Prior-frame temporal graphs: each frame node links to its k predecessors
// with weight k + 1 - distance, so the nearest frame weighs most.

#include <cstddef>
#include <optional>
#include <vector>

#include "ccgnn/matrix.hpp"
#include "ccgnn/rng.hpp"

namespace ccgnn {

struct Edge {
  std::size_t source = 0;  // later frame i
  std::size_t target = 0;  // earlier frame j < i
  std::size_t distance = 0;
  double weight = 0.0;
  bool operator==(const Edge&) const = default;
};

/// Directed prior-frame graph. Nodes are split into equal-length segments
/// (one per sequence); edges never cross a segment boundary. A plain chain is
/// a single segment.
class TemporalGraph {
 public:
  TemporalGraph(std::size_t num_nodes, std::size_t k, std::size_t segment_length, std::vector<Edge> edges);

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t k() const noexcept { return k_; }
  std::size_t segment_length() const noexcept { return segment_length_; }
  std::size_t num_segments() const noexcept { return num_nodes_ / segment_length_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Frame-step distance d_ij if edge (i, j) exists.
  std::optional<std::size_t> distance(std::size_t i, std::size_t j) const;
  std::size_t in_degree(std::size_t i) const;

  bool operator==(const TemporalGraph&) const = default;

 private:
  std::size_t num_nodes_;
  std::size_t k_;
  std::size_t segment_length_;
  std::vector<Edge> edges_;
};

/// k + 1 - d for 1 <= d <= k.
double edge_weight(std::size_t d, std::size_t k);

TemporalGraph build_prior_frame_graph(std::size_t num_nodes, std::size_t k);

/// Disjoint union of `segments` prior-frame chains of `segment_length` nodes.
TemporalGraph build_segmented_graph(std::size_t segments, std::size_t segment_length, std::size_t k);

/// Symmetric propagation operator D^-1/2 (max(A, A^T) + k I) D^-1/2, stored as
/// one dense square block per segment stacked vertically.
struct NormalizedAdjacency {
  std::size_t block_size = 0;
  Matrix blocks;  // (segments * block_size) x block_size

  std::size_t num_nodes() const noexcept { return blocks.rows(); }
  /// Full N x N operator (block diagonal).
  Matrix dense() const;
};

/// Weighted symmetric adjacency with self-loops, before normalization.
Matrix symmetric_adjacency(const TemporalGraph& g);

NormalizedAdjacency normalize_adjacency(const TemporalGraph& g);

struct AugmentedGraph {
  TemporalGraph graph;
  Matrix features;
};

/// Drops each edge with probability p_edge and zeroes each feature column
/// (across all nodes) with probability p_feat. Inputs are not modified.
AugmentedGraph augment_graph(const TemporalGraph& g, const Matrix& features, double p_edge, double p_feat, Rng& rng);

}  // namespace ccgnn
