#include <cmath>

#include "ccgnn/encoders.hpp"
#include "ccgnn/trainer.hpp"
#include "doctest.h"
#include "gen.hpp"
#include "oracles.hpp"

using namespace ccgnn;

namespace {

EncoderConfig small_config(ModelKind m) {
  EncoderConfig c;
  c.model = m;
  c.widths = {6, 4};
  c.audio_dim = 5;
  c.visual_dim = 7;
  return c;
}

}  // namespace

TEST_CASE("model names round trip") {
  CHECK(parse_model("cortical") == ModelKind::Cortical);
  CHECK(parse_model(model_name(ModelKind::CcaGnn)) == ModelKind::CcaGnn);
  CHECK_THROWS(parse_model("gru"));
}

TEST_CASE("parameter layout") {
  Rng rng(1);
  const ParameterSet c = init_encoder(small_config(ModelKind::Cortical), rng);
  CHECK(c["block0.gcn_a.weight"].rows() == 5);
  CHECK(c["block0.gcn_v.weight"].rows() == 7);
  CHECK(c["block0.w_m"].rows() == 12);
  CHECK(c["block1.w_mu"].rows() == 4);
  CHECK(c.size() == 2 * 16);

  const ParameterSet b = init_encoder(small_config(ModelKind::CcaGnn), rng);
  CHECK(b.contains("audio.layer0.bias"));
  CHECK(!b.contains("audio.layer1.bias"));  // output is standardized, a bias would be removed
  CHECK(b["visual.layer1.weight"].cols() == 4);
}

TEST_CASE("gcn layer equals the dense literal") {
  gen::for_cases(61, 20, [](Rng& rng, int c) {
    CAPTURE(c);
    const std::size_t n = gen::size_in(rng, 1, 12);
    const std::size_t k = gen::size_in(rng, 1, 5);
    const std::size_t fin = gen::size_in(rng, 1, 5);
    const std::size_t fout = gen::size_in(rng, 1, 5);
    const Matrix x = gen::matrix(rng, n, fin);
    const Matrix w = gen::matrix(rng, fin, fout);
    const Matrix b = gen::matrix(rng, 1, fout);
    const NormalizedAdjacency adj = normalize_adjacency(build_prior_frame_graph(n, k));
    const Matrix dense = oracle::normalized_adjacency(n, k);
    for (bool leaky : {false, true}) {
      Tape t;
      const NodeId out = gcn_layer(t, t.constant(adj.blocks), t.constant(x), {t.parameter(w), t.parameter(b)},
                                   leaky ? Activation::LeakyRelu : Activation::Identity);
      CHECK(max_abs_diff(t.value(out), oracle::gcn(dense, x, w, &b, kLeakySlope, leaky)) < 1e-12);
    }
  });
}

TEST_CASE("cortical layer equals its line-by-line transcription") {
  gen::for_cases(62, 25, [](Rng& rng, int c) {
    CAPTURE(c);
    const std::size_t seg = gen::size_in(rng, 1, 5);
    const std::size_t n = seg * gen::size_in(rng, 1, 3);
    const std::size_t f = gen::size_in(rng, 1, 5);
    oracle::CorticalWeights w;
    w.w_a = gen::matrix(rng, f, f);
    w.w_v = gen::matrix(rng, f, f);
    w.w_m = gen::matrix(rng, 2 * f, f);
    w.w_w = gen::matrix(rng, 2 * f, f);
    w.w_rho = gen::matrix(rng, 2 * f, f);
    w.w_mu = gen::matrix(rng, f, f);
    for (Matrix* b : {&w.b_a, &w.b_v, &w.b_m, &w.b_w, &w.b_rho, &w.b_mu}) *b = gen::matrix(rng, 1, f);
    const Matrix ha = gen::matrix(rng, n, f);
    const Matrix hv = gen::matrix(rng, n, f);
    const Matrix init(1, f);
    Tape t;
    const CorticalLayerVars v{t.parameter(w.w_a), t.parameter(w.w_v), t.parameter(w.w_m), t.parameter(w.w_w),
                              t.parameter(w.w_rho), t.parameter(w.w_mu), t.parameter(w.b_a), t.parameter(w.b_v),
                              t.parameter(w.b_m), t.parameter(w.b_w), t.parameter(w.b_rho), t.parameter(w.b_mu)};
    const auto out = cortical_layer_forward(t, t.constant(ha), t.constant(hv), v, t.constant(init), seg);
    const auto ref = oracle::cortical_layer(ha, hv, w, init, seg);
    CHECK(max_abs_diff(t.value(out.h_a), ref.h_a) < 1e-12);
    CHECK(max_abs_diff(t.value(out.h_v), ref.h_v) < 1e-12);
    CHECK(max_abs_diff(t.value(out.state.mu_raw), ref.mu_raw) < 1e-12);
  });
}

TEST_CASE("gates lie in (0, 1) and outputs in (-1, 1)") {
  Rng rng(63);
  const EncoderConfig cfg = small_config(ModelKind::Cortical);
  const ParameterSet ps = init_encoder(cfg, rng);
  Tape t;
  const BoundParameters bound(t, ps);
  const TemporalGraph g = build_segmented_graph(2, 8, 3);
  const StackOutput out = encode(t, bound, cfg, g, gen::matrix(rng, 16, 5, 3.0), gen::matrix(rng, 16, 7, 3.0));
  for (const TraceEntry& e : out.trace) {
    for (double v : t.value(e.node).data()) {
      if (e.kind == ActivationKind::Gate) {
        CHECK((v > 0.0 && v < 1.0));
      } else {
        CHECK(std::abs(v) < 1.0);
      }
    }
  }
  CHECK(t.value(out.z_a).cols() == 4);
}

TEST_CASE("memory resets at every sequence boundary") {
  // Sequence 1 of a two-sequence graph must encode exactly like a lone copy
  // of that sequence: no state and no graph edge crosses the boundary.
  Rng rng(64);
  const EncoderConfig cfg = small_config(ModelKind::Cortical);
  const ParameterSet ps = init_encoder(cfg, rng);
  const Matrix xa = gen::matrix(rng, 20, 5);
  const Matrix xv = gen::matrix(rng, 20, 7);
  Tape t2;
  const BoundParameters b2(t2, ps);
  const StackOutput both = encode(t2, b2, cfg, build_segmented_graph(2, 10, 3), xa, xv);
  Tape t1;
  const BoundParameters b1(t1, ps);
  const StackOutput alone = encode(t1, b1, cfg, build_prior_frame_graph(10, 3), xa.block_rows(10, 10),
                                   xv.block_rows(10, 10));
  // Compare the last block's raw audio output (the "output" trace entry).
  const NodeId last_both = both.trace[both.trace.size() - 2].node;
  const NodeId last_alone = alone.trace[alone.trace.size() - 2].node;
  CHECK(max_abs_diff(t2.value(last_both).block_rows(10, 10), t1.value(last_alone)) < 1e-13);
}

TEST_CASE("full self-supervised loss gradients, both encoders") {
  for (std::uint64_t seed : {0u, 1u, 7u, 42u}) {
    CAPTURE(seed);
    CHECK(encoder_gradcheck(ModelKind::Cortical, seed).max_relative_error < 1e-4);
    CHECK(encoder_gradcheck(ModelKind::CcaGnn, seed).max_relative_error < 1e-4);
  }
  EncoderGradCheck strong;
  strong.lambda = 1.0;  // decorrelation dominates
  CHECK(encoder_gradcheck(ModelKind::Cortical, 3, strong).max_relative_error < 1e-4);
  CHECK(encoder_gradcheck(ModelKind::CcaGnn, 3, strong).max_relative_error < 1e-4);
}

TEST_CASE("baseline views differ only by augmentation") {
  Rng rng(65);
  EncoderConfig cfg = small_config(ModelKind::CcaGnn);
  const ParameterSet ps = init_encoder(cfg, rng);
  const TemporalGraph g = build_prior_frame_graph(12, 3);
  const Matrix x = gen::matrix(rng, 12, 5);
  cfg.p_edge = 0.0;
  cfg.p_feat = 0.0;
  Tape t;
  const BoundParameters bound(t, ps);
  const ViewNodes v = cca_gnn_encode(t, bound, cfg, "audio", g, x, rng);
  CHECK(t.value(v.z_a) == t.value(v.z_b));
  CHECK_THROWS_AS(cca_gnn_encode(t, bound, cfg, "visual", g, x, rng), ShapeError);
}
