#pragma once

// Audio front end and the synthetic audio-visual corpus.
//
// Log-filterbank features: 800-sample frames with a 500-sample hop, Hamming
// window, zero-padded 4096-point FFT keeping the 2048 positive bins, 22
// mel-spaced triangular filters from 0 Hz to Nyquist, natural log with a
// 1e-10 floor.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ccgnn/matrix.hpp"
#include "ccgnn/rng.hpp"

namespace ccgnn {

struct Waveform {
  double sample_rate = 22050.0;
  std::vector<double> samples;
};

struct LogFbConfig {
  double sample_rate = 22050.0;
  std::size_t frame_length = 800;
  std::size_t hop = 500;
  std::size_t fft_size = 4096;
  std::size_t num_filters = 22;
  double log_floor = 1e-10;
};

struct FeatureSequence {
  Matrix frames;  // M x num_filters
  std::size_t frame_length = 0;
  std::size_t hop = 0;
};

/// floor((len - frame_length) / hop) + 1; throws when len < frame_length.
std::size_t frame_count(std::size_t length, std::size_t frame_length, std::size_t hop);

/// M x frame_length matrix; row m holds samples [m*hop, m*hop + frame_length).
Matrix frame_signal(const Waveform& w, std::size_t frame_length, std::size_t hop);

/// Frequencies (Hz) of the filter peaks, ascending.
std::vector<double> filter_center_frequencies(const LogFbConfig& cfg);

/// num_filters x (fft_size / 2) weights over FFT bins 1 .. fft_size/2.
Matrix mel_filterbank(const LogFbConfig& cfg);

FeatureSequence logfb_extract(const Waveform& w, const LogFbConfig& cfg = {});

double mean_power(std::span<const double> x);

struct NoiseMix {
  Waveform mixed;
  std::vector<double> scaled_noise;  // alpha * noise segment actually added
  std::size_t offset = 0;
  double alpha = 0.0;
};

/// clean + alpha * noise[offset .. offset + len), alpha chosen so that
/// 10 log10(P_clean / P_noise_scaled) = snr_db; offset drawn uniformly.
NoiseMix add_noise_snr(const Waveform& clean, const Waveform& noise, double snr_db, Rng& rng);

struct SynthConfig {
  std::size_t sequences = 50;
  std::size_t frames = 48;
  std::size_t latent_dim = 4;
  std::size_t visual_dim = 50;
  std::size_t harmonics = 12;
  double snr_min_db = -12.0;
  double snr_max_db = 12.0;
  double visual_noise = 0.1;
  // Latent dynamics per frame: v <- momentum * v + step * N(0, 1),
  // z <- decay * z + v; burn_in steps run before the first frame so every
  // sequence starts near the stationary regime. Correlation time is a few
  // frames, roughly syllable rate at 44 frames/s.
  double latent_decay = 0.8;
  double latent_momentum = 0.6;
  double latent_step = 0.5;
  std::size_t latent_burn_in = 50;
  LogFbConfig logfb;
};

struct AVSequence {
  Matrix clean;   // frames x 22
  Matrix noisy;   // frames x 22
  Matrix visual;  // frames x visual_dim
  double snr_db = 0.0;
  bool operator==(const AVSequence&) const = default;
};

struct AVDataset {
  SynthConfig config;
  std::uint64_t seed = 0;
  std::vector<AVSequence> sequences;

  std::size_t frames_per_sequence() const { return config.frames; }
  std::size_t total_samples() const { return sequences.size() * config.frames; }
};

/// Latent-to-signal maps shared by every sequence of one dataset.
struct SynthBasis {
  std::vector<double> harmonic_hz;  // harmonics
  Matrix audio_map;                 // harmonics x latent
  Matrix visual_map;                // visual_dim x latent
};

SynthBasis make_synth_basis(const SynthConfig& cfg, std::uint64_t seed);

/// One generated sequence with its intermediate signals, for inspection.
struct SynthSequence {
  AVSequence features;
  Matrix latent;          // frames x latent_dim
  Matrix noise_features;  // log-FB of the scaled noise alone
  Waveform clean_wave;
};

SynthSequence synth_sequence(const SynthConfig& cfg, const SynthBasis& basis, std::uint64_t seed);

/// Pure function of (cfg, seed); sequence i uses a seed derived from (seed, i).
AVDataset synth_av_generate(const SynthConfig& cfg, std::uint64_t seed);

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

struct FoldSplits {
  std::vector<FoldSplit> folds;
};

/// Shuffles sequence ids, deals them into `fold_count` equal folds and splits
/// each fold by `ratios` (train, validation, test) in sequence units.
FoldSplits split_folds(std::size_t sequence_count, std::size_t fold_count, std::array<double, 3> ratios, Rng& rng);

}  // namespace ccgnn
