#include "ccgnn/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ccgnn {
namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_edges_hz(const LogFbConfig& cfg) {
  const double top = hz_to_mel(cfg.sample_rate / 2.0);
  std::vector<double> edges(cfg.num_filters + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(cfg.num_filters + 1));
  }
  return edges;
}

// FFTW planning is not thread-safe; execution on plan-compatible buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        in_(fftw_alloc_real(n)),
        out_(fftw_alloc_complex(n / 2 + 1)) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
    if (plan_ == nullptr) throw std::runtime_error("FFTW plan creation failed");
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() noexcept { return in_.get(); }
  void execute() noexcept { fftw_execute(plan_); }
  double power(std::size_t bin) const noexcept { return out_.get()[bin][0] * out_.get()[bin][0] + out_.get()[bin][1] * out_.get()[bin][1]; }
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_ = nullptr;
};

void validate(const LogFbConfig& cfg) {
  if (!(cfg.sample_rate > 0.0)) throw std::invalid_argument("logfb: sample rate must be positive");
  if (cfg.frame_length == 0 || cfg.hop == 0) throw std::invalid_argument("logfb: frame length and hop must be >= 1");
  if (cfg.fft_size < cfg.frame_length || cfg.fft_size % 2 != 0) {
    throw std::invalid_argument("logfb: FFT size must be even and at least the frame length");
  }
  if (cfg.num_filters == 0) throw std::invalid_argument("logfb: need at least one filter");
}

std::size_t samples_for_frames(const SynthConfig& cfg) {
  return (cfg.frames - 1) * cfg.logfb.hop + cfg.logfb.frame_length;
}

}  // namespace

std::size_t frame_count(std::size_t length, std::size_t frame_length, std::size_t hop) {
  if (frame_length == 0 || hop == 0) throw std::invalid_argument("frame_signal: frame length and hop must be >= 1");
  if (length < frame_length) {
    throw std::invalid_argument("frame_signal: signal of " + std::to_string(length) +
                                " samples is shorter than one frame of " + std::to_string(frame_length));
  }
  return (length - frame_length) / hop + 1;
}

Matrix frame_signal(const Waveform& w, std::size_t frame_length, std::size_t hop) {
  const std::size_t m = frame_count(w.samples.size(), frame_length, hop);
  Matrix frames(m, frame_length);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(w.samples.begin() + static_cast<std::ptrdiff_t>(i * hop), frame_length, frames.row(i).begin());
  }
  return frames;
}

std::vector<double> filter_center_frequencies(const LogFbConfig& cfg) {
  validate(cfg);
  const auto edges = mel_edges_hz(cfg);
  return {edges.begin() + 1, edges.end() - 1};
}

Matrix mel_filterbank(const LogFbConfig& cfg) {
  validate(cfg);
  const auto edges = mel_edges_hz(cfg);
  const std::size_t bins = cfg.fft_size / 2;
  Matrix fb(cfg.num_filters, bins);
  for (std::size_t m = 0; m < cfg.num_filters; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    for (std::size_t b = 1; b <= bins; ++b) {
      const double f = static_cast<double>(b) * cfg.sample_rate / static_cast<double>(cfg.fft_size);
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      fb(m, b - 1) = w;
    }
  }
  return fb;
}

FeatureSequence logfb_extract(const Waveform& w, const LogFbConfig& cfg) {
  validate(cfg);
  const Matrix frames = frame_signal(w, cfg.frame_length, cfg.hop);
  const Matrix fb = mel_filterbank(cfg);
  const std::size_t bins = cfg.fft_size / 2;

  std::vector<double> window(cfg.frame_length);
  for (std::size_t n = 0; n < cfg.frame_length; ++n) {
    window[n] = cfg.frame_length == 1
                    ? 1.0
                    : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                             static_cast<double>(cfg.frame_length - 1));
  }

  RealFft fft(cfg.fft_size);
  Matrix power(frames.rows(), bins);
  for (std::size_t m = 0; m < frames.rows(); ++m) {
    double* in = fft.input();
    std::fill(in, in + cfg.fft_size, 0.0);
    const auto frame = frames.row(m);
    for (std::size_t n = 0; n < cfg.frame_length; ++n) in[n] = frame[n] * window[n];
    fft.execute();
    for (std::size_t b = 1; b <= bins; ++b) power(m, b - 1) = fft.power(b);
  }

  Matrix energies = matmul_nt(power, fb);
  for (double& v : energies.data()) v = std::log(std::max(v, cfg.log_floor));
  return FeatureSequence{std::move(energies), cfg.frame_length, cfg.hop};
}

double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

NoiseMix add_noise_snr(const Waveform& clean, const Waveform& noise, double snr_db, Rng& rng) {
  if (clean.samples.empty()) throw std::invalid_argument("add_noise_snr: empty clean signal");
  if (noise.samples.size() < clean.samples.size()) {
    throw std::invalid_argument("add_noise_snr: noise is shorter than the clean signal");
  }
  if (clean.sample_rate != noise.sample_rate) throw std::invalid_argument("add_noise_snr: sample rates differ");
  const double p_clean = mean_power(clean.samples);
  if (!(p_clean > 0.0)) throw std::invalid_argument("add_noise_snr: clean signal has zero power");

  const std::size_t len = clean.samples.size();
  const std::size_t span = noise.samples.size() - len;
  const auto offset = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(span + 1));
  const std::span<const double> segment(noise.samples.data() + offset, len);
  const double p_noise = mean_power(segment);
  if (!(p_noise > 0.0)) throw std::invalid_argument("add_noise_snr: noise segment has zero power");

  NoiseMix mix;
  mix.offset = offset;
  mix.alpha = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  mix.scaled_noise.resize(len);
  mix.mixed.sample_rate = clean.sample_rate;
  mix.mixed.samples.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    mix.scaled_noise[i] = mix.alpha * segment[i];
    mix.mixed.samples[i] = clean.samples[i] + mix.scaled_noise[i];
  }
  return mix;
}

SynthBasis make_synth_basis(const SynthConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0xba515ULL}));
  SynthBasis basis;
  const double lo = std::log(150.0);
  const double hi = std::log(std::min(5000.0, 0.45 * cfg.logfb.sample_rate));
  for (std::size_t h = 0; h < cfg.harmonics; ++h) {
    const double t = cfg.harmonics == 1 ? 0.5 : static_cast<double>(h) / static_cast<double>(cfg.harmonics - 1);
    basis.harmonic_hz.push_back(std::exp(lo + (hi - lo) * t) * (1.0 + 0.03 * (uniform01(rng) - 0.5)));
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
  basis.audio_map = random_normal(cfg.harmonics, cfg.latent_dim, norm, rng);
  basis.visual_map = random_normal(cfg.visual_dim, cfg.latent_dim, norm, rng);
  return basis;
}

SynthSequence synth_sequence(const SynthConfig& cfg, const SynthBasis& basis, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t frames = cfg.frames;
  const std::size_t latent_dim = cfg.latent_dim;
  const double sr = cfg.logfb.sample_rate;

  // Smooth latent trajectory: damped random walk with momentum.
  Matrix latent(frames, latent_dim);
  std::vector<double> z(latent_dim);
  std::vector<double> v(latent_dim, 0.0);
  for (double& zi : z) zi = standard_normal(rng);
  for (std::size_t t = 0; t < cfg.latent_burn_in + frames; ++t) {
    for (std::size_t j = 0; j < latent_dim; ++j) {
      v[j] = cfg.latent_momentum * v[j] + cfg.latent_step * standard_normal(rng);
      z[j] = cfg.latent_decay * z[j] + v[j];
      if (t >= cfg.latent_burn_in) latent(t - cfg.latent_burn_in, j) = z[j];
    }
  }

  // Clean audio: harmonics whose log-amplitudes are linear in the latent.
  const Matrix log_amp = matmul_nt(latent, basis.audio_map);  // frames x harmonics
  const std::size_t n_samples = samples_for_frames(cfg);
  const double half_frame = static_cast<double>(cfg.logfb.frame_length) / 2.0;
  Waveform clean{sr, std::vector<double>(n_samples, 0.0)};
  for (std::size_t h = 0; h < basis.harmonic_hz.size(); ++h) {
    const double phase0 = 2.0 * std::numbers::pi * uniform01(rng);
    const double step = 2.0 * std::numbers::pi * basis.harmonic_hz[h] / sr;
    for (std::size_t n = 0; n < n_samples; ++n) {
      double pos = (static_cast<double>(n) - half_frame) / static_cast<double>(cfg.logfb.hop);
      pos = std::clamp(pos, 0.0, static_cast<double>(frames - 1));
      const auto t0 = static_cast<std::size_t>(pos);
      const std::size_t t1 = std::min(t0 + 1, frames - 1);
      const double frac = pos - static_cast<double>(t0);
      const double la = (1.0 - frac) * log_amp(t0, h) + frac * log_amp(t1, h);
      clean.samples[n] += 0.2 * std::exp(0.8 * la) * std::sin(phase0 + step * static_cast<double>(n));
    }
  }

  // Noise: white plus a few slowly modulated tones, longer than the clean signal.
  const std::size_t noise_len = n_samples + cfg.logfb.fft_size;
  Waveform noise{sr, std::vector<double>(noise_len)};
  for (double& s : noise.samples) s = standard_normal(rng);
  for (int tone = 0; tone < 6; ++tone) {
    const double f = uniform(rng, 100.0, 4000.0);
    const double mod = uniform(rng, 0.5, 4.0);
    const double amp = uniform(rng, 0.3, 1.5);
    const double ph = 2.0 * std::numbers::pi * uniform01(rng);
    for (std::size_t n = 0; n < noise_len; ++n) {
      const double t = static_cast<double>(n) / sr;
      noise.samples[n] += amp * (0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * mod * t)) *
                          std::sin(ph + 2.0 * std::numbers::pi * f * t);
    }
  }

  const double snr_db = uniform(rng, cfg.snr_min_db, cfg.snr_max_db);
  NoiseMix mix = add_noise_snr(clean, noise, snr_db, rng);

  Matrix visual = matmul_nt(latent, basis.visual_map);
  for (double& x : visual.data()) x += cfg.visual_noise * standard_normal(rng);

  SynthSequence out{
      AVSequence{logfb_extract(clean, cfg.logfb).frames, logfb_extract(mix.mixed, cfg.logfb).frames,
                 std::move(visual), snr_db},
      std::move(latent),
      logfb_extract(Waveform{sr, std::move(mix.scaled_noise)}, cfg.logfb).frames,
      std::move(clean),
  };
  return out;
}

AVDataset synth_av_generate(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.sequences == 0 || cfg.frames == 0 || cfg.latent_dim == 0 || cfg.visual_dim == 0 || cfg.harmonics == 0) {
    throw std::invalid_argument("synth_av_generate: counts and dimensions must be positive");
  }
  if (cfg.snr_min_db > cfg.snr_max_db) throw std::invalid_argument("synth_av_generate: empty SNR range");
  const SynthBasis basis = make_synth_basis(cfg, seed);
  AVDataset ds{cfg, seed, {}};
  ds.sequences.reserve(cfg.sequences);
  for (std::size_t i = 0; i < cfg.sequences; ++i) {
    ds.sequences.push_back(synth_sequence(cfg, basis, derive_seed(seed, {0x5e9ULL, i})).features);
  }
  return ds;
}

FoldSplits split_folds(std::size_t sequence_count, std::size_t fold_count, std::array<double, 3> ratios, Rng& rng) {
  if (fold_count == 0) throw std::invalid_argument("split_folds: fold count must be >= 1");
  for (double r : ratios)
    if (r < 0.0) throw std::invalid_argument("split_folds: ratios must be non-negative");
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw std::invalid_argument("split_folds: ratios must sum to 1");
  }
  if (sequence_count == 0 || sequence_count % fold_count != 0) {
    throw std::invalid_argument("split_folds: " + std::to_string(sequence_count) +
                                " sequences cannot be divided into " + std::to_string(fold_count) + " equal folds");
  }
  std::vector<std::size_t> ids(sequence_count);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  for (std::size_t i = ids.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(ids[i - 1], ids[j]);
  }

  const std::size_t per_fold = sequence_count / fold_count;
  const auto n_train = static_cast<std::size_t>(std::llround(ratios[0] * static_cast<double>(per_fold)));
  const auto n_val = static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(per_fold)));
  if (n_train + n_val > per_fold) throw std::invalid_argument("split_folds: ratios leave no room for a test split");
  const std::size_t n_test = per_fold - n_train - n_val;
  if ((ratios[0] > 0.0 && n_train == 0) || (ratios[1] > 0.0 && n_val == 0) || (ratios[2] > 0.0 && n_test == 0)) {
    throw std::invalid_argument("split_folds: folds of " + std::to_string(per_fold) +
                                " sequences are too small for the requested ratios");
  }

  FoldSplits out;
  for (std::size_t f = 0; f < fold_count; ++f) {
    const auto begin = ids.begin() + static_cast<std::ptrdiff_t>(f * per_fold);
    FoldSplit split;
    split.train.assign(begin, begin + static_cast<std::ptrdiff_t>(n_train));
    split.validation.assign(begin + static_cast<std::ptrdiff_t>(n_train),
                            begin + static_cast<std::ptrdiff_t>(n_train + n_val));
    split.test.assign(begin + static_cast<std::ptrdiff_t>(n_train + n_val),
                      begin + static_cast<std::ptrdiff_t>(per_fold));
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.test.begin(), split.test.end());
    out.folds.push_back(std::move(split));
  }
  return out;
}

}  // namespace ccgnn
