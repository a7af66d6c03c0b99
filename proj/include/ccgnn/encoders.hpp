#pragma once

// Graph encoders.
//
// CCA-GNN baseline: per modality, two graph-convolution layers shared by two
// randomly augmented views of the same graph.
//
// Cortical stack: per block, one graph convolution per modality produces
// h_a, h_v (N x F), followed by a cortical layer:
//
//   f_a = sig(h_a W_a + b_a)          f_v = sig(h_v W_v + b_v)
//   f_m = sig([h_a,h_v] W_m + b_m)    f_w = sig([h_a,h_v] W_w + b_w)
//   rho = tanh([h_a,h_v] W_rho + b_rho)
//   omega = f_w * rho
//   mu_raw[n] = omega[n] + f_m[n] * mu_raw[n-1]     (restarts per sequence)
//   mu = tanh(mu_raw W_mu + b_mu)
//   h_a' = mu * f_a,  h_v' = mu * f_v
//
// with * the elementwise product and rows indexing frame nodes.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccgnn/objectives.hpp"
#include "ccgnn/parameters.hpp"
#include "ccgnn/rng.hpp"
#include "ccgnn/tape.hpp"
#include "ccgnn/tgraph.hpp"

namespace ccgnn {

enum class ModelKind { Cortical, CcaGnn };

std::string_view model_name(ModelKind m) noexcept;
ModelKind parse_model(std::string_view name);

enum class Activation { Identity, LeakyRelu };

inline constexpr double kLeakySlope = 0.01;

struct EncoderConfig {
  ModelKind model = ModelKind::Cortical;
  std::vector<std::size_t> widths{512, 256};
  std::size_t audio_dim = 22;
  std::size_t visual_dim = 50;
  double p_edge = 0.2;
  double p_feat = 0.2;
};

/// Tape handles of one graph-convolution layer. `bias` is absent on layers
/// whose output is column-standardized (a constant shift is removed anyway).
struct GcnLayerVars {
  NodeId weight;
  std::optional<NodeId> bias;
};

/// activation(adj * X * W + b)
NodeId gcn_layer(Tape& tape, NodeId adj_blocks, NodeId x, const GcnLayerVars& p, Activation act);

struct CorticalLayerVars {
  NodeId w_a, w_v, w_m, w_w, w_rho, w_mu;
  NodeId b_a, b_v, b_m, b_w, b_rho, b_mu;
};

struct CorticalFilters {
  NodeId f_a, f_v, f_m, f_w;
};

struct Modulation {
  NodeId rho_pre;
  NodeId omega;
};

/// Tape handles of every intermediate of one cortical layer pass.
struct CorticalState {
  CorticalFilters filters;
  Modulation modulation;
  NodeId mu_raw;
  NodeId mu;
};

struct CorticalLayerOutput {
  NodeId h_a;
  NodeId h_v;
  CorticalState state;
};

CorticalFilters cortical_filters(Tape& tape, NodeId h_a, NodeId h_v, const CorticalLayerVars& p);
Modulation premodulate_and_modulate(Tape& tape, NodeId h_a, NodeId h_v, NodeId f_w, const CorticalLayerVars& p);
CorticalLayerOutput cortical_layer_forward(Tape& tape, NodeId h_a, NodeId h_v, const CorticalLayerVars& p,
                                           NodeId mu_init, std::size_t segment_length);

/// Parameter names inside a ParameterSet.
std::string cortical_param(std::size_t block, std::string_view leaf);
std::string ccagnn_param(std::string_view modality, std::size_t layer, std::string_view leaf);

ParameterSet init_encoder(const EncoderConfig& cfg, Rng& rng);

CorticalLayerVars bind_cortical_layer(const BoundParameters& bound, std::size_t block);

enum class ActivationKind { Gate, Signed };

/// One recorded activation matrix of a forward pass.
struct TraceEntry {
  std::size_t layer = 0;
  std::string modality;  // "audio", "visual" or "joint"
  std::string name;
  ActivationKind kind = ActivationKind::Signed;
  NodeId node;
};

struct StackOutput {
  NodeId z_a;
  NodeId z_v;
  std::vector<TraceEntry> trace;
};

/// Two (or more) cortical blocks; outputs are column-standardized.
StackOutput cortical_stack_forward(Tape& tape, const BoundParameters& params, const EncoderConfig& cfg,
                                   const NormalizedAdjacency& adj, NodeId x_a, NodeId x_v);

/// One-modality CCA-GNN encoder over an unaugmented graph (standardized).
NodeId ccagnn_forward(Tape& tape, const BoundParameters& params, const EncoderConfig& cfg, std::string_view modality,
                      const NormalizedAdjacency& adj, NodeId x, std::vector<TraceEntry>* trace = nullptr);

struct ViewNodes {
  NodeId z_a;
  NodeId z_b;
};

/// Draws two augmentations of (g, X) and encodes both through the same
/// weights.
ViewNodes cca_gnn_encode(Tape& tape, const BoundParameters& params, const EncoderConfig& cfg,
                         std::string_view modality, const TemporalGraph& g, const Matrix& x, Rng& rng);

struct SslLossNodes {
  NodeId total;
  NodeId invariance;
  NodeId decorrelation;
};

/// Self-supervised objective of either model on one graph. Cortical: CCA
/// between the audio and visual outputs. CCA-GNN: per-modality CCA between two
/// augmented views, averaged over both modalities.
SslLossNodes ssl_loss(Tape& tape, const BoundParameters& params, const EncoderConfig& cfg, const CcaConfig& cca,
                      const TemporalGraph& g, const Matrix& x_a, const Matrix& x_v, Rng& rng);

/// Unaugmented encoding used for downstream features and activation traces.
StackOutput encode(Tape& tape, const BoundParameters& params, const EncoderConfig& cfg, const TemporalGraph& g,
                   const Matrix& x_a, const Matrix& x_v);

}  // namespace ccgnn
