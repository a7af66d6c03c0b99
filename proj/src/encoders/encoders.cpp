#include "ccgnn/encoders.hpp"

#include <stdexcept>

namespace ccgnn {
namespace {

constexpr std::string_view kCorticalLeaves[] = {"w_a", "w_v", "w_m", "w_w", "w_rho", "w_mu",
                                                "b_a", "b_v", "b_m", "b_w", "b_rho", "b_mu"};

std::size_t input_dim(const EncoderConfig& cfg, std::string_view modality) {
  return modality == "audio" ? cfg.audio_dim : cfg.visual_dim;
}

void check_widths(const EncoderConfig& cfg) {
  if (cfg.widths.empty()) throw std::invalid_argument("encoder: at least one layer width is required");
  for (std::size_t w : cfg.widths)
    if (w == 0) throw std::invalid_argument("encoder: layer widths must be positive");
}

}  // namespace

std::string_view model_name(ModelKind m) noexcept { return m == ModelKind::Cortical ? "cortical" : "ccagnn"; }

ModelKind parse_model(std::string_view name) {
  if (name == "cortical") return ModelKind::Cortical;
  if (name == "ccagnn") return ModelKind::CcaGnn;
  throw std::invalid_argument("unknown model '" + std::string(name) + "' (expected cortical or ccagnn)");
}

NodeId gcn_layer(Tape& tape, NodeId adj_blocks, NodeId x, const GcnLayerVars& p, Activation act) {
  NodeId h = tape.block_matmul(adj_blocks, tape.matmul(x, p.weight));
  if (p.bias) h = tape.add_row_bias(h, *p.bias);
  return act == Activation::LeakyRelu ? tape.leaky_relu(h, kLeakySlope) : h;
}

CorticalFilters cortical_filters(Tape& tape, NodeId h_a, NodeId h_v, const CorticalLayerVars& p) {
  const auto& a = tape.value(h_a);
  const auto& v = tape.value(h_v);
  if (!a.same_shape(v)) throw ShapeError("cortical_filters: h_a " + a.shape_string() + " vs h_v " + v.shape_string());
  const NodeId joint = tape.concat_cols(h_a, h_v);
  return CorticalFilters{
      tape.sigmoid(tape.add_row_bias(tape.matmul(h_a, p.w_a), p.b_a)),
      tape.sigmoid(tape.add_row_bias(tape.matmul(h_v, p.w_v), p.b_v)),
      tape.sigmoid(tape.add_row_bias(tape.matmul(joint, p.w_m), p.b_m)),
      tape.sigmoid(tape.add_row_bias(tape.matmul(joint, p.w_w), p.b_w)),
  };
}

Modulation premodulate_and_modulate(Tape& tape, NodeId h_a, NodeId h_v, NodeId f_w, const CorticalLayerVars& p) {
  const NodeId joint = tape.concat_cols(h_a, h_v);
  const NodeId rho = tape.tanh(tape.add_row_bias(tape.matmul(joint, p.w_rho), p.b_rho));
  return Modulation{rho, tape.hadamard(f_w, rho)};
}

CorticalLayerOutput cortical_layer_forward(Tape& tape, NodeId h_a, NodeId h_v, const CorticalLayerVars& p,
                                           NodeId mu_init, std::size_t segment_length) {
  const CorticalFilters f = cortical_filters(tape, h_a, h_v, p);
  const Modulation m = premodulate_and_modulate(tape, h_a, h_v, f.f_w, p);
  const NodeId mu_raw = tape.memory_scan(m.omega, f.f_m, mu_init, segment_length);
  const NodeId mu = tape.tanh(tape.add_row_bias(tape.matmul(mu_raw, p.w_mu), p.b_mu));
  return CorticalLayerOutput{tape.hadamard(mu, f.f_a), tape.hadamard(mu, f.f_v), CorticalState{f, m, mu_raw, mu}};
}

std::string cortical_param(std::size_t block, std::string_view leaf) {
  return "block" + std::to_string(block) + "." + std::string(leaf);
}

std::string ccagnn_param(std::string_view modality, std::size_t layer, std::string_view leaf) {
  return std::string(modality) + ".layer" + std::to_string(layer) + "." + std::string(leaf);
}

ParameterSet init_encoder(const EncoderConfig& cfg, Rng& rng) {
  check_widths(cfg);
  ParameterSet ps;
  if (cfg.model == ModelKind::Cortical) {
    std::size_t in_a = cfg.audio_dim;
    std::size_t in_v = cfg.visual_dim;
    for (std::size_t b = 0; b < cfg.widths.size(); ++b) {
      const std::size_t f = cfg.widths[b];
      ps.add(cortical_param(b, "gcn_a.weight"), glorot_uniform(in_a, f, rng));
      ps.add(cortical_param(b, "gcn_a.bias"), Matrix(1, f));
      ps.add(cortical_param(b, "gcn_v.weight"), glorot_uniform(in_v, f, rng));
      ps.add(cortical_param(b, "gcn_v.bias"), Matrix(1, f));
      ps.add(cortical_param(b, "w_a"), glorot_uniform(f, f, rng));
      ps.add(cortical_param(b, "w_v"), glorot_uniform(f, f, rng));
      ps.add(cortical_param(b, "w_m"), glorot_uniform(2 * f, f, rng));
      ps.add(cortical_param(b, "w_w"), glorot_uniform(2 * f, f, rng));
      ps.add(cortical_param(b, "w_rho"), glorot_uniform(2 * f, f, rng));
      ps.add(cortical_param(b, "w_mu"), glorot_uniform(f, f, rng));
      for (std::string_view bias : {"b_a", "b_v", "b_m", "b_w", "b_rho", "b_mu"}) {
        ps.add(cortical_param(b, bias), Matrix(1, f));
      }
      in_a = in_v = f;
    }
    return ps;
  }
  for (std::string_view modality : {"audio", "visual"}) {
    std::size_t in = input_dim(cfg, modality);
    for (std::size_t l = 0; l < cfg.widths.size(); ++l) {
      ps.add(ccagnn_param(modality, l, "weight"), glorot_uniform(in, cfg.widths[l], rng));
      if (l + 1 < cfg.widths.size()) ps.add(ccagnn_param(modality, l, "bias"), Matrix(1, cfg.widths[l]));
      in = cfg.widths[l];
    }
  }
  return ps;
}

CorticalLayerVars bind_cortical_layer(const BoundParameters& bound, std::size_t block) {
  NodeId ids[12];
  for (std::size_t i = 0; i < 12; ++i) ids[i] = bound[cortical_param(block, kCorticalLeaves[i])];
  return CorticalLayerVars{ids[0], ids[1], ids[2], ids[3], ids[4],  ids[5],
                           ids[6], ids[7], ids[8], ids[9], ids[10], ids[11]};
}

StackOutput cortical_stack_forward(Tape& tape, const BoundParameters& params, const EncoderConfig& cfg,
                                   const NormalizedAdjacency& adj, NodeId x_a, NodeId x_v) {
  check_widths(cfg);
  const NodeId adj_id = tape.constant(adj.blocks);
  StackOutput out;
  NodeId h_a = x_a;
  NodeId h_v = x_v;
  for (std::size_t b = 0; b < cfg.widths.size(); ++b) {
    const GcnLayerVars ga{params[cortical_param(b, "gcn_a.weight")], params[cortical_param(b, "gcn_a.bias")]};
    const GcnLayerVars gv{params[cortical_param(b, "gcn_v.weight")], params[cortical_param(b, "gcn_v.bias")]};
    const NodeId conv_a = gcn_layer(tape, adj_id, h_a, ga, Activation::Identity);
    const NodeId conv_v = gcn_layer(tape, adj_id, h_v, gv, Activation::Identity);
    const NodeId mu_init = tape.constant(Matrix(1, cfg.widths[b]));
    const CorticalLayerOutput layer =
        cortical_layer_forward(tape, conv_a, conv_v, bind_cortical_layer(params, b), mu_init, adj.block_size);

    const auto& f = layer.state.filters;
    out.trace.push_back({b, "audio", "f_a", ActivationKind::Gate, f.f_a});
    out.trace.push_back({b, "visual", "f_v", ActivationKind::Gate, f.f_v});
    out.trace.push_back({b, "joint", "f_m", ActivationKind::Gate, f.f_m});
    out.trace.push_back({b, "joint", "f_w", ActivationKind::Gate, f.f_w});
    out.trace.push_back({b, "joint", "rho", ActivationKind::Signed, layer.state.modulation.rho_pre});
    out.trace.push_back({b, "joint", "mu", ActivationKind::Signed, layer.state.mu});
    out.trace.push_back({b, "audio", "output", ActivationKind::Signed, layer.h_a});
    out.trace.push_back({b, "visual", "output", ActivationKind::Signed, layer.h_v});
    h_a = layer.h_a;
    h_v = layer.h_v;
  }
  out.z_a = tape.standardize_columns(h_a);
  out.z_v = tape.standardize_columns(h_v);
  return out;
}

NodeId ccagnn_forward(Tape& tape, const BoundParameters& params, const EncoderConfig& cfg, std::string_view modality,
                      const NormalizedAdjacency& adj, NodeId x, std::vector<TraceEntry>* trace) {
  check_widths(cfg);
  const NodeId adj_id = tape.constant(adj.blocks);
  NodeId h = x;
  for (std::size_t l = 0; l < cfg.widths.size(); ++l) {
    const bool last = (l + 1 == cfg.widths.size());
    GcnLayerVars vars{params[ccagnn_param(modality, l, "weight")], std::nullopt};
    if (!last) vars.bias = params[ccagnn_param(modality, l, "bias")];
    h = gcn_layer(tape, adj_id, h, vars, last ? Activation::Identity : Activation::LeakyRelu);
    if (trace != nullptr) trace->push_back({l, std::string(modality), "output", ActivationKind::Signed, h});
  }
  return tape.standardize_columns(h);
}

ViewNodes cca_gnn_encode(Tape& tape, const BoundParameters& params, const EncoderConfig& cfg,
                         std::string_view modality, const TemporalGraph& g, const Matrix& x, Rng& rng) {
  if (x.cols() != input_dim(cfg, modality)) {
    throw ShapeError("cca_gnn_encode: " + std::string(modality) + " features have " + std::to_string(x.cols()) +
                     " columns, encoder expects " + std::to_string(input_dim(cfg, modality)));
  }
  AugmentedGraph t_a = augment_graph(g, x, cfg.p_edge, cfg.p_feat, rng);
  AugmentedGraph t_b = augment_graph(g, x, cfg.p_edge, cfg.p_feat, rng);
  const NodeId z_a = ccagnn_forward(tape, params, cfg, modality, normalize_adjacency(t_a.graph),
                                    tape.constant(std::move(t_a.features)));
  const NodeId z_b = ccagnn_forward(tape, params, cfg, modality, normalize_adjacency(t_b.graph),
                                    tape.constant(std::move(t_b.features)));
  return ViewNodes{z_a, z_b};
}

SslLossNodes ssl_loss(Tape& tape, const BoundParameters& params, const EncoderConfig& cfg, const CcaConfig& cca,
                      const TemporalGraph& g, const Matrix& x_a, const Matrix& x_v, Rng& rng) {
  if (cfg.model == ModelKind::Cortical) {
    const StackOutput out =
        cortical_stack_forward(tape, params, cfg, normalize_adjacency(g), tape.constant(x_a), tape.constant(x_v));
    const CcaLossNodes l = cca_loss(tape, out.z_a, out.z_v, cca);
    return {l.total, l.invariance, l.decorrelation};
  }
  const ViewNodes va = cca_gnn_encode(tape, params, cfg, "audio", g, x_a, rng);
  const ViewNodes vv = cca_gnn_encode(tape, params, cfg, "visual", g, x_v, rng);
  const CcaLossNodes la = cca_loss(tape, va.z_a, va.z_b, cca);
  const CcaLossNodes lv = cca_loss(tape, vv.z_a, vv.z_b, cca);
  auto avg = [&](NodeId a, NodeId b) { return tape.scale(tape.add(a, b), 0.5); };
  return {avg(la.total, lv.total), avg(la.invariance, lv.invariance), avg(la.decorrelation, lv.decorrelation)};
}

StackOutput encode(Tape& tape, const BoundParameters& params, const EncoderConfig& cfg, const TemporalGraph& g,
                   const Matrix& x_a, const Matrix& x_v) {
  const NormalizedAdjacency adj = normalize_adjacency(g);
  if (cfg.model == ModelKind::Cortical) {
    return cortical_stack_forward(tape, params, cfg, adj, tape.constant(x_a), tape.constant(x_v));
  }
  StackOutput out;
  out.z_a = ccagnn_forward(tape, params, cfg, "audio", adj, tape.constant(x_a), &out.trace);
  out.z_v = ccagnn_forward(tape, params, cfg, "visual", adj, tape.constant(x_v), &out.trace);
  return out;
}

}  // namespace ccgnn
