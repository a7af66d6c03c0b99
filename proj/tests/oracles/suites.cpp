#include "suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>

#include "ccgnn/encoders.hpp"
#include "ccgnn/features.hpp"
#include "ccgnn/metrics.hpp"
#include "ccgnn/objectives.hpp"
#include "ccgnn/rng.hpp"
#include "ccgnn/stats.hpp"
#include "ccgnn/tape.hpp"
#include "ccgnn/tgraph.hpp"
#include "ccgnn/trainer.hpp"
#include "oracles.hpp"

namespace oracle {
namespace {

using ccgnn::Rng;

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(ccgnn::uniform01(rng) * static_cast<double>(hi - lo + 1));
}

double max_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// Columns mixed so that their correlations are far from zero.
Matrix correlated_matrix(std::size_t n, std::size_t d, Rng& rng) {
  Matrix base = ccgnn::random_normal(n, d, 1.0, rng);
  Matrix mix = ccgnn::random_normal(d, d, 1.0, rng);
  return oracle::product(base, mix);
}

CheckResult guarded(const char* name, CheckResult (*body)(std::uint64_t), std::uint64_t seed) {
  try {
    return body(seed);
  } catch (const std::exception& e) {
    return {name, false, std::string("threw: ") + e.what()};
  }
}

}  // namespace

CheckResult check_gradients(std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cortical = ccgnn::encoder_gradcheck(ccgnn::ModelKind::Cortical, seed);
  const auto baseline = ccgnn::encoder_gradcheck(ccgnn::ModelKind::CcaGnn, seed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = cortical.max_relative_error < 1e-4 && baseline.max_relative_error < 1e-4 && secs < 60.0;
  return {"gradient oracle", ok,
          fmt("max rel err cortical %.3e (%zu entries), ccagnn %.3e (%zu entries), %.2f s; bound 1e-4, 60 s",
              cortical.max_relative_error, cortical.entries_checked, baseline.max_relative_error,
              baseline.entries_checked, secs)};
}

CheckResult check_standardized_decorrelation(std::uint64_t seed) {
  Rng rng(ccgnn::derive_seed(seed, {0xdec0}));
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix raw = correlated_matrix(64, 8, rng);
    const auto z = ccgnn::column_standardize(raw);
    if (z.warning()) return {"standardized decorrelation", false, "unexpected degenerate column"};
    worst = std::max(worst, std::abs(ccgnn::decorrelation_term(z.values) - pearson_offdiag(raw)));
  }
  return {"standardized decorrelation", worst <= 1e-10, fmt("max |diff| %.3e over 100 matrices; bound 1e-10", worst)};
}

CheckResult check_graph_builder() {
  std::size_t cases = 0;
  double adj_worst = 0.0;
  for (std::size_t n = 1; n <= 20; ++n) {
    for (std::size_t k = 1; k <= 10; ++k) {
      const ccgnn::TemporalGraph g = ccgnn::build_prior_frame_graph(n, k);
      std::vector<std::tuple<std::size_t, std::size_t, std::size_t, double>> got;
      for (const auto& e : g.edges()) got.emplace_back(e.source, e.target, e.distance, e.weight);
      std::sort(got.begin(), got.end());
      const auto want = prior_frame_edges(n, k);
      if (got != want) {
        return {"graph oracle", false,
                fmt("N=%zu k=%zu: builder has %zu edges, enumeration %zu", n, k, got.size(), want.size())};
      }
      adj_worst = std::max(adj_worst, max_diff(ccgnn::normalize_adjacency(g).dense(), normalized_adjacency(n, k)));
      ++cases;
    }
  }
  const bool ok = adj_worst <= 1e-14;
  return {"graph oracle", ok,
          fmt("%zu (N, k) cases identical, weights k+1-d; normalized adjacency max |diff| %.1e", cases, adj_worst)};
}

CheckResult check_cortical_transcription(std::uint64_t seed) {
  Rng rng(ccgnn::derive_seed(seed, {0xc0c7}));
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t seg = pick(rng, 1, 6);
    const std::size_t n = seg * pick(rng, 1, 3);
    const std::size_t fin = pick(rng, 1, 6);
    const std::size_t f = pick(rng, 1, 6);
    const Matrix h_a = ccgnn::random_normal(n, fin, 1.0, rng);
    const Matrix h_v = ccgnn::random_normal(n, fin, 1.0, rng);
    CorticalWeights w;
    w.w_a = ccgnn::random_normal(fin, f, 0.8, rng);
    w.w_v = ccgnn::random_normal(fin, f, 0.8, rng);
    w.w_m = ccgnn::random_normal(2 * fin, f, 0.8, rng);
    w.w_w = ccgnn::random_normal(2 * fin, f, 0.8, rng);
    w.w_rho = ccgnn::random_normal(2 * fin, f, 0.8, rng);
    w.w_mu = ccgnn::random_normal(f, f, 0.8, rng);
    for (Matrix* b : {&w.b_a, &w.b_v, &w.b_m, &w.b_w, &w.b_rho, &w.b_mu}) *b = ccgnn::random_normal(1, f, 0.5, rng);
    const Matrix mu_init = ccgnn::random_normal(1, f, 0.5, rng);

    ccgnn::Tape tape;
    const ccgnn::CorticalLayerVars vars{tape.parameter(w.w_a),   tape.parameter(w.w_v),  tape.parameter(w.w_m),
                                        tape.parameter(w.w_w),   tape.parameter(w.w_rho), tape.parameter(w.w_mu),
                                        tape.parameter(w.b_a),   tape.parameter(w.b_v),  tape.parameter(w.b_m),
                                        tape.parameter(w.b_w),   tape.parameter(w.b_rho), tape.parameter(w.b_mu)};
    const auto out = ccgnn::cortical_layer_forward(tape, tape.constant(h_a), tape.constant(h_v), vars,
                                                   tape.constant(mu_init), seg);
    const CorticalLiteral ref = cortical_layer(h_a, h_v, w, mu_init, seg);
    const auto& s = out.state;
    for (const auto& [id, m] : {std::pair{s.filters.f_a, &ref.f_a}, {s.filters.f_v, &ref.f_v},
                                {s.filters.f_m, &ref.f_m}, {s.filters.f_w, &ref.f_w},
                                {s.modulation.rho_pre, &ref.rho}, {s.modulation.omega, &ref.omega},
                                {s.mu_raw, &ref.mu_raw}, {s.mu, &ref.mu}, {out.h_a, &ref.h_a}, {out.h_v, &ref.h_v}}) {
      worst = std::max(worst, max_diff(tape.value(id), *m));
    }
  }
  return {"cortical transcription", worst <= 1e-12,
          fmt("max |diff| %.3e over 50 instances, every intermediate; bound 1e-12", worst)};
}

CheckResult check_memory_scan(std::uint64_t seed) {
  const Matrix zero(1, 1);
  const Matrix ex = ccgnn::memory_scan(Matrix{{1.0}, {1.0}, {1.0}}, Matrix{{0.5}, {0.5}, {0.5}}, zero, 3);
  if (!(ex == Matrix{{1.0}, {1.5}, {1.75}})) {
    return {"memory scan", false, fmt("N=3 example gave [%g, %g, %g]", ex(0, 0), ex(1, 0), ex(2, 0))};
  }

  Rng rng(ccgnn::derive_seed(seed, {0x5ca9}));
  Matrix omega(12, 3);
  for (double& v : omega.data()) v = static_cast<double>(pick(rng, 0, 20)) - 10.0;
  const Matrix init{{2.0, -3.0, 0.5}};
  // f_m = 0: no memory at all.
  if (!(ccgnn::memory_scan(omega, Matrix(12, 3, 0.0), init, 4) == omega)) {
    return {"memory scan", false, "f_m = 0 does not reproduce omega"};
  }
  // f_m = 1: running sum from the segment's initial state.
  Matrix sums(12, 3);
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 3; ++j) sums(i, j) = omega(i, j) + (i % 4 == 0 ? init(0, j) : sums(i - 1, j));
  }
  if (!(ccgnn::memory_scan(omega, Matrix(12, 3, 1.0), init, 4) == sums)) {
    return {"memory scan", false, "f_m = 1 is not the segment running sum"};
  }

  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t seg = pick(rng, 1, 8);
    const std::size_t n = seg * pick(rng, 1, 4);
    const std::size_t f = pick(rng, 1, 5);
    const Matrix om = ccgnn::random_normal(n, f, 1.0, rng);
    const Matrix gate = ccgnn::random_uniform(n, f, 0.0, 1.0, rng);
    const Matrix mi = ccgnn::random_normal(1, f, 1.0, rng);
    worst = std::max(worst, max_diff(ccgnn::memory_scan(om, gate, mi, seg), memory_scan_unrolled(om, gate, mi, seg)));
  }
  return {"memory scan", worst <= 1e-12,
          fmt("[1, 1.5, 1.75] exact; f_m in {0, 1} exact; unrolled closed form max |diff| %.1e", worst)};
}

CheckResult check_activation_metrics() {
  // Gates: unit 0 fires on 2/4 samples, unit 1 on 4/4, unit 2 never (0.5 is
  // not above the threshold).
  const Matrix gates{{0.9, 0.51, 0.0}, {0.1, 0.7, 0.2}, {0.6, 0.8, 0.5}, {0.5, 0.99, 0.49}};
  const Matrix signed_units{{-1.0, 0.0}, {0.0, 0.5}, {2.0, 0.25}, {3.0, -0.1}};
  ccgnn::ActivationRecord gate_rec{0, "audio", "f_a", ccgnn::ActivationKind::Gate, gates};
  ccgnn::ActivationRecord sig_rec{0, "audio", "output", ccgnn::ActivationKind::Signed, signed_units};

  const std::vector<double> gate_rates = ccgnn::firing_rates(gate_rec);
  const std::vector<double> sig_rates = ccgnn::firing_rates(sig_rec);
  const bool rates_ok = gate_rates == std::vector<double>{0.5, 1.0, 0.0} && sig_rates == std::vector<double>{0.5, 0.5};
  const double auc_gate = ccgnn::activation_auc(gate_rates);  // (0.5+1)/2 + (1+0)/2
  const double auc_sig = ccgnn::activation_auc(sig_rates);    // (0.5+0.5)/2
  const std::vector<double> half(512, 0.5);
  const double auc_half = ccgnn::activation_auc(half);
  const bool ok = rates_ok && auc_gate == 1.25 && auc_sig == 0.5 && auc_half == 255.5;
  return {"activation metrics", ok,
          fmt("rates %s; AUC %.4g (want 1.25), %.4g (want 0.5); 512 x 0.5 -> %.4g (want 255.5)",
              rates_ok ? "match hand counts" : "DIFFER", auc_gate, auc_sig, auc_half)};
}

CheckResult check_wilcoxon(std::uint64_t seed) {
  Rng rng(ccgnn::derive_seed(seed, {0x3117}));
  double worst = 0.0;
  int flags_agree = 0;
  int datasets = 0;
  while (datasets < 50) {
    const std::size_t n = pick(rng, ccgnn::kWilcoxonMinN, 10);
    const double shift = ccgnn::uniform(rng, -1.0, 1.0);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Quarter steps produce ties and the occasional zero difference.
      a[i] = std::round(4.0 * ccgnn::standard_normal(rng)) / 4.0 + std::round(4.0 * shift) / 4.0;
      b[i] = std::round(4.0 * ccgnn::standard_normal(rng)) / 4.0;
    }
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < n; ++i) nonzero += (a[i] != b[i]);
    if (nonzero < ccgnn::kWilcoxonMinN) continue;
    ++datasets;
    const ccgnn::WilcoxonResult got = ccgnn::wilcoxon_signed_rank(a, b);
    const WilcoxonBrute want = wilcoxon(a, b);
    worst = std::max({worst, std::abs(got.p_two_sided - want.p_two_sided), std::abs(got.p_lower - want.p_lower),
                      std::abs(got.w_plus - want.w_plus), std::abs(got.w_minus - want.w_minus)});
    flags_agree += (got.significant == (want.p_two_sided < 0.05)) && got.exact;
  }
  const bool ok = worst <= 1e-12 && flags_agree == 50;
  return {"wilcoxon", ok,
          fmt("max |diff| (W+, W-, p) %.1e over 50 datasets n<=10; 5%% flag agrees %d/50", worst, flags_agree)};
}

CheckResult check_signal_pipeline(std::uint64_t seed) {
  Rng rng(ccgnn::derive_seed(seed, {0x519a}));
  const ccgnn::LogFbConfig cfg;
  std::string detail;
  bool ok = true;

  // Shape from the frame formula.
  for (std::size_t len : {800, 1299, 1300, 22050}) {
    ccgnn::Waveform w{cfg.sample_rate, std::vector<double>(len)};
    for (double& s : w.samples) s = ccgnn::standard_normal(rng);
    const auto fs = ccgnn::logfb_extract(w, cfg);
    const std::size_t m = (len - cfg.frame_length) / cfg.hop + 1;
    if (fs.frames.rows() != m || fs.frames.cols() != 22) {
      ok = false;
      detail += fmt("len %zu gave %zux%zu, want %zux22; ", len, fs.frames.rows(), fs.frames.cols(), m);
    }
  }

  // 0 dB mixing.
  ccgnn::Waveform clean{cfg.sample_rate, std::vector<double>(4000)};
  ccgnn::Waveform noise{cfg.sample_rate, std::vector<double>(9000)};
  for (double& s : clean.samples) s = 0.3 * ccgnn::standard_normal(rng);
  for (double& s : noise.samples) s = 2.0 * ccgnn::standard_normal(rng);
  const auto mix = ccgnn::add_noise_snr(clean, noise, 0.0, rng);
  const double pc = ccgnn::mean_power(clean.samples);
  const double rel = std::abs(pc - ccgnn::mean_power(mix.scaled_noise)) / pc;
  if (!(rel <= 1e-9)) ok = false;

  // Silence hits the floor.
  ccgnn::Waveform silent{cfg.sample_rate, std::vector<double>(3000, 0.0)};
  const auto quiet = ccgnn::logfb_extract(silent, cfg);
  const double floor = std::log(cfg.log_floor);
  const bool floor_ok = std::all_of(quiet.frames.data().begin(), quiet.frames.data().end(),
                                    [&](double v) { return v == floor; });
  if (!floor_ok) ok = false;

  // Naive DFT of two frames through the same filterbank.
  ccgnn::Waveform tone{cfg.sample_rate, std::vector<double>(1300)};
  for (std::size_t i = 0; i < tone.samples.size(); ++i) {
    tone.samples[i] = std::sin(0.07 * static_cast<double>(i)) + 0.1 * ccgnn::standard_normal(rng);
  }
  const auto fast = ccgnn::logfb_extract(tone, cfg);
  const Matrix fb = ccgnn::mel_filterbank(cfg);
  double dft_worst = 0.0;
  for (std::size_t m = 0; m < fast.frames.rows(); ++m) {
    std::vector<double> frame(tone.samples.begin() + static_cast<std::ptrdiff_t>(m * cfg.hop),
                              tone.samples.begin() + static_cast<std::ptrdiff_t>(m * cfg.hop + cfg.frame_length));
    const std::vector<double> power = power_spectrum_naive(frame, cfg.fft_size);
    for (std::size_t f = 0; f < fb.rows(); ++f) {
      double e = 0.0;
      for (std::size_t b = 0; b < power.size(); ++b) e += fb(f, b) * power[b];
      dft_worst = std::max(dft_worst, std::abs(std::log(std::max(e, cfg.log_floor)) - fast.frames(m, f)));
    }
  }
  if (!(dft_worst <= 1e-8)) ok = false;

  detail += fmt("M x 22 shapes %s; 0 dB power rel diff %.1e (bound 1e-9); silence at ln(1e-10) %s; naive DFT "
                "log-FB max |diff| %.1e",
                detail.empty() ? "ok" : "WRONG", rel, floor_ok ? "everywhere" : "NOT everywhere", dft_worst);
  return {"signal pipeline", ok, detail};
}

std::vector<CheckResult> run_all(std::uint64_t seed) {
  std::vector<CheckResult> out;
  out.push_back(guarded("gradient oracle", check_gradients, seed));
  out.push_back(guarded("standardized decorrelation", check_standardized_decorrelation, seed));
  out.push_back(guarded("graph oracle", [](std::uint64_t) { return check_graph_builder(); }, seed));
  out.push_back(guarded("cortical transcription", check_cortical_transcription, seed));
  out.push_back(guarded("memory scan", check_memory_scan, seed));
  out.push_back(guarded("activation metrics", [](std::uint64_t) { return check_activation_metrics(); }, seed));
  out.push_back(guarded("wilcoxon", check_wilcoxon, seed));
  out.push_back(guarded("signal pipeline", check_signal_pipeline, seed));
  return out;
}

}  // namespace oracle
