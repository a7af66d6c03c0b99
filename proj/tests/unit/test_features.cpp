#include <cmath>
#include <set>

#include "ccgnn/features.hpp"
#include "doctest.h"
#include "gen.hpp"
#include "oracles.hpp"

using namespace ccgnn;

namespace {

double mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

Waveform noise_wave(Rng& rng, std::size_t n, double scale) {
  Waveform w{22050.0, std::vector<double>(n)};
  for (double& s : w.samples) s = scale * standard_normal(rng);
  return w;
}

SynthConfig small_synth() {
  SynthConfig c;
  c.sequences = 4;
  c.frames = 16;
  return c;
}

}  // namespace

TEST_CASE("frame count formula") {
  CHECK(frame_count(800, 800, 500) == 1);
  CHECK(frame_count(1299, 800, 500) == 1);
  CHECK(frame_count(1300, 800, 500) == 2);
  CHECK(frame_count(22050, 800, 500) == 43);
  CHECK_THROWS(frame_count(799, 800, 500));
  gen::for_cases(71, 50, [](Rng& rng, int c) {
    CAPTURE(c);
    const std::size_t len = gen::size_in(rng, 800, 30000);
    const Waveform w = noise_wave(rng, len, 1.0);
    const Matrix f = frame_signal(w, 800, 500);
    REQUIRE(f.rows() == (len - 800) / 500 + 1);
    const std::size_t m = f.rows() - 1;
    CHECK(f(m, 799) == w.samples[m * 500 + 799]);
    CHECK(logfb_extract(w).frames.rows() == f.rows());
  });
}

TEST_CASE("filterbank: 22 mel-spaced triangles up to Nyquist") {
  const LogFbConfig cfg;
  const Matrix fb = mel_filterbank(cfg);
  REQUIRE(fb.rows() == 22);
  REQUIRE(fb.cols() == 2048);
  const auto centers = filter_center_frequencies(cfg);
  REQUIRE(centers.size() == 22);
  const double step = mel(11025.0) / 23.0;
  for (std::size_t m = 0; m < 22; ++m) {
    CHECK(mel(centers[m]) == doctest::Approx(step * static_cast<double>(m + 1)).epsilon(1e-12));
    double peak = 0.0;
    for (std::size_t b = 0; b < fb.cols(); ++b) {
      CHECK(fb(m, b) >= 0.0);
      CHECK(fb(m, b) <= 1.0);
      peak = std::max(peak, fb(m, b));
    }
    CHECK(peak > 0.5);  // bin spacing is 5.4 Hz, so every triangle is sampled near its apex
  }
  // Adjacent triangles cross at half height, so between the first and last
  // apex the weights of every bin sum to one.
  for (std::size_t b = 1; b <= 2048; ++b) {
    const double hz = static_cast<double>(b) * 22050.0 / 4096.0;
    if (hz <= centers.front() || hz >= centers.back()) continue;
    double s = 0.0;
    for (std::size_t m = 0; m < 22; ++m) s += fb(m, b - 1);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("log-FB equals a naive DFT through the same filterbank") {
  Rng rng(72);
  const LogFbConfig cfg;
  const Waveform w = noise_wave(rng, 1800, 0.5);
  const auto fast = logfb_extract(w, cfg);
  const Matrix fb = mel_filterbank(cfg);
  for (std::size_t m = 0; m < fast.frames.rows(); ++m) {
    std::vector<double> frame(w.samples.begin() + static_cast<std::ptrdiff_t>(500 * m),
                              w.samples.begin() + static_cast<std::ptrdiff_t>(500 * m + 800));
    const auto power = oracle::power_spectrum_naive(frame, 4096);
    for (std::size_t f = 0; f < 22; ++f) {
      double e = 0.0;
      for (std::size_t b = 0; b < 2048; ++b) e += fb(f, b) * power[b];
      CHECK(std::abs(std::log(e) - fast.frames(m, f)) < 1e-9);
    }
  }
}

TEST_CASE("silence sits on the log floor") {
  const Waveform w{22050.0, std::vector<double>(5000, 0.0)};
  const FeatureSequence f = logfb_extract(w);
  CHECK(f.frames.rows() == frame_count(5000, 800, 500));
  for (double v : f.frames.data()) CHECK(v == std::log(1e-10));
}

TEST_CASE("SNR mixing hits the requested ratio") {
  gen::for_cases(73, 30, [](Rng& rng, int c) {
    CAPTURE(c);
    const Waveform clean = noise_wave(rng, gen::size_in(rng, 100, 3000), gen::real_in(rng, 0.01, 3.0));
    const Waveform noise = noise_wave(rng, clean.samples.size() + gen::size_in(rng, 0, 500), 1.0);
    const double snr = gen::real_in(rng, -20.0, 20.0);
    const NoiseMix mix = add_noise_snr(clean, noise, snr, rng);
    const double got = 10.0 * std::log10(mean_power(clean.samples) / mean_power(mix.scaled_noise));
    CHECK(got == doctest::Approx(snr).epsilon(1e-9));
    CHECK(mix.offset + clean.samples.size() <= noise.samples.size());
    for (std::size_t i = 0; i < clean.samples.size(); ++i) {
      REQUIRE(mix.mixed.samples[i] == clean.samples[i] + mix.scaled_noise[i]);
    }
  });
  Rng rng(1);
  const Waveform c = noise_wave(rng, 100, 1.0);
  CHECK_THROWS(add_noise_snr(c, noise_wave(rng, 50, 1.0), 0.0, rng));
  CHECK_THROWS(add_noise_snr(Waveform{22050.0, std::vector<double>(100, 0.0)}, c, 0.0, rng));
}

TEST_CASE("synthetic corpus shapes and determinism") {
  const SynthConfig cfg = small_synth();
  const AVDataset a = synth_av_generate(cfg, 5);
  const AVDataset b = synth_av_generate(cfg, 5);
  const AVDataset other = synth_av_generate(cfg, 6);
  REQUIRE(a.sequences.size() == 4);
  CHECK(a.total_samples() == 64);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(a.sequences[i] == b.sequences[i]);
    CHECK(a.sequences[i].clean.rows() == 16);
    CHECK(a.sequences[i].clean.cols() == 22);
    CHECK(a.sequences[i].visual.cols() == 50);
    CHECK(a.sequences[i].snr_db >= -12.0);
    CHECK(a.sequences[i].snr_db <= 12.0);
    CHECK(all_finite(a.sequences[i].noisy));
  }
  CHECK(!(a.sequences[0] == other.sequences[0]));
}

TEST_CASE("visual stream is the latent through a fixed map plus small noise") {
  const SynthConfig cfg = small_synth();
  const SynthBasis basis = make_synth_basis(cfg, 9);
  const SynthSequence s = synth_sequence(cfg, basis, 123);
  const Matrix clean_visual = matmul_nt(s.latent, basis.visual_map);
  double resid = 0.0, signal = 0.0;
  for (std::size_t i = 0; i < clean_visual.size(); ++i) {
    const double d = s.features.visual.data()[i] - clean_visual.data()[i];
    resid += d * d;
    signal += clean_visual.data()[i] * clean_visual.data()[i];
  }
  const double n = static_cast<double>(clean_visual.size());
  CHECK(std::sqrt(resid / n) == doctest::Approx(cfg.visual_noise).epsilon(0.15));
  CHECK(signal > 4.0 * resid);
}

TEST_CASE("noisy features move toward the noise as SNR drops") {
  auto gap_at = [](double snr) {
    SynthConfig c = small_synth();
    c.snr_min_db = c.snr_max_db = snr;
    const AVSequence s = synth_av_generate(c, 3).sequences[0];
    double g = 0.0;
    for (std::size_t i = 0; i < s.clean.size(); ++i) g += std::abs(s.noisy.data()[i] - s.clean.data()[i]);
    return g / static_cast<double>(s.clean.size());
  };
  const double hi = gap_at(30.0), mid = gap_at(0.0), lo = gap_at(-20.0);
  CHECK(hi < mid);
  CHECK(mid < lo);
  CHECK(lo > 2.0 * hi);
}

TEST_CASE("fold splits partition sequences 60/20/20") {
  Rng rng(74);
  const FoldSplits s = split_folds(1000, 20, {0.6, 0.2, 0.2}, rng);
  REQUIRE(s.folds.size() == 20);
  std::set<std::size_t> seen;
  for (const FoldSplit& f : s.folds) {
    CHECK(f.train.size() == 30);
    CHECK(f.validation.size() == 10);
    CHECK(f.test.size() == 10);
    for (const auto* part : {&f.train, &f.validation, &f.test}) {
      for (std::size_t id : *part) CHECK(seen.insert(id).second);
    }
  }
  CHECK(seen.size() == 1000);
  CHECK_THROWS(split_folds(999, 20, {0.6, 0.2, 0.2}, rng));
  CHECK_THROWS(split_folds(20, 10, {0.6, 0.2, 0.2}, rng));  // 2 per fold leaves no validation sequence
  CHECK_NOTHROW(split_folds(10, 1, {0.6, 0.2, 0.2}, rng));
}
