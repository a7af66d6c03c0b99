#pragma once

// Two-phase training and fold evaluation.
//
// Phase one trains an encoder with the CCA objective, full batch, on the
// training sequences of a fold. Phase two freezes it and fits a linear head
// from the concatenated final representations to the clean log-FB frames,
// keeping the head parameters of the best validation epoch.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ccgnn/encoders.hpp"
#include "ccgnn/features.hpp"
#include "ccgnn/gradcheck.hpp"
#include "ccgnn/metrics.hpp"
#include "ccgnn/objectives.hpp"
#include "ccgnn/parameters.hpp"

namespace ccgnn {

/// Non-finite loss or gradient during training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ModelKind model = ModelKind::Cortical;
  std::size_t k = 3;
  std::size_t ssl_epochs = 200;
  double ssl_lr = 1e-3;
  double lambda = 1e-4;
  std::size_t head_epochs = 2000;
  double head_lr = 0.005;
  double head_weight_decay = 0.0004;
  std::vector<std::size_t> widths{512, 256};
  std::uint64_t seed = 0;
  std::vector<std::size_t> folds{0};
  std::size_t fold_count = 20;
  double p_edge = 0.2;
  double p_feat = 0.2;

  EncoderConfig encoder_config(std::size_t audio_dim, std::size_t visual_dim) const;
  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

/// Frames of a set of whole sequences, stacked in sequence order.
struct SplitData {
  std::vector<std::size_t> sequence_ids;
  std::size_t frames = 0;
  Matrix audio;   // noisy log-FB, scaled
  Matrix visual;  // scaled
  Matrix target;  // clean log-FB, scaled to [0, 1] by training range

  std::size_t num_nodes() const noexcept { return audio.rows(); }
  TemporalGraph graph(std::size_t k) const;
};

/// Per-column affine map x -> (x - shift) / scale, fitted on one matrix and
/// applied to others.
struct ColumnScaler {
  std::vector<double> shift;
  std::vector<double> scale;

  /// Mean and population standard deviation; constant columns get scale 1.
  static ColumnScaler standard(const Matrix& m);
  /// Minimum and range; constant columns get scale 1.
  static ColumnScaler min_max(const Matrix& m);
  Matrix apply(const Matrix& m) const;
};

/// Train-split statistics: inputs are z-scored per column, targets min-max
/// scaled per column.
struct Scaling {
  ColumnScaler audio;
  ColumnScaler visual;
  ColumnScaler target;
};

struct FoldData {
  SplitData train;
  SplitData validation;
  SplitData test;
  Scaling scaling;
};

FoldSplits dataset_folds(const AVDataset& ds, const RunConfig& cfg);
FoldData prepare_fold(const AVDataset& ds, const FoldSplit& split);

struct SslHistoryRow {
  std::size_t epoch = 0;
  double total = 0.0;
  double invariance = 0.0;
  double decorrelation = 0.0;
  bool operator==(const SslHistoryRow&) const = default;
};

struct SslResult {
  ParameterSet params;
  std::vector<SslHistoryRow> history;  // loss before each update
  bool standardize_warning = false;
};

/// Initializes an encoder from `seed` and trains it for cfg.ssl_epochs.
SslResult pretrain_ssl(const SplitData& train, const RunConfig& cfg, std::uint64_t seed);
/// Continues from given parameters.
SslResult pretrain_ssl(const SplitData& train, const RunConfig& cfg, std::uint64_t seed, ParameterSet init);

/// Final audio and visual representations [H_a, H_v] before the encoder's
/// column standardization.
Matrix encode_raw(const ParameterSet& encoder, const EncoderConfig& ecfg, const SplitData& split, std::size_t k,
                  ActivationTrace* trace = nullptr);

struct HeadHistoryRow {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
  bool operator==(const HeadHistoryRow&) const = default;
};

/// Head input of every split is encode_raw standardized with the training
/// split's statistics; on the training split this is the encoder's own output
/// rescaled to unit variance.
struct HeadModel {
  ColumnScaler features;
  HeadParams params;
};

Matrix head_predict(const HeadModel& head, const Matrix& raw_features);

struct HeadResult {
  HeadParams params;  // parameters at best_epoch
  std::vector<HeadHistoryRow> history;
  std::size_t best_epoch = 0;
  double best_validation_mse = 0.0;
};

HeadResult train_head(const Matrix& train_features, const Matrix& train_targets, const Matrix& val_features,
                      const Matrix& val_targets, const RunConfig& cfg, std::uint64_t seed);

/// Head checkpoint arrays: head.weight, head.bias, head.feature_shift,
/// head.feature_scale.
ParameterSet head_to_parameters(const HeadModel& head);
HeadModel head_from_parameters(const ParameterSet& params);

/// Scales raw features with training statistics, then runs train_head.
HeadModel fit_head(const Matrix& train_raw, const Matrix& train_targets, const Matrix& val_raw,
                   const Matrix& val_targets, const RunConfig& cfg, std::uint64_t seed, HeadResult* details = nullptr);

struct FoldReport {
  std::size_t fold = 0;
  ModelKind model = ModelKind::Cortical;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double test_mse = 0.0;
  double baseline_mse = 0.0;  // predicting the training-target mean
  std::size_t best_head_epoch = 0;
  std::vector<double> rates_audio;
  std::vector<double> rates_visual;
  double auc_audio = 0.0;
  double auc_visual = 0.0;
  std::vector<SslHistoryRow> ssl_history;
  std::vector<HeadHistoryRow> head_history;
  bool standardize_warning = false;
};

/// Seed of one (model, k, fold) cell.
std::uint64_t cell_seed(std::uint64_t base, ModelKind model, std::size_t k, std::size_t fold) noexcept;

/// Test metrics of an already trained encoder and head.
FoldReport assess(const FoldData& data, const ParameterSet& encoder, const EncoderConfig& ecfg, const HeadModel& head,
                  std::size_t k);

/// Pretrains, fits the head and assesses one fold.
FoldReport evaluate_fold(const AVDataset& ds, std::size_t fold, const RunConfig& cfg);
FoldReport evaluate_fold(const FoldData& data, std::size_t fold, const RunConfig& cfg);

struct EncoderGradCheck {
  std::size_t nodes = 12;
  std::size_t audio_dim = 5;
  std::size_t visual_dim = 7;
  std::size_t k = 3;
  std::vector<std::size_t> widths{8, 4};
  double lambda = 1e-4;
  double step = 1e-6;
};

/// Finite-difference check of the full self-supervised loss of a freshly
/// initialized encoder on random inputs over a single prior-frame chain.
/// Augmentations are redrawn from the same seed on every evaluation.
GradCheckResult encoder_gradcheck(ModelKind model, std::uint64_t seed, const EncoderGradCheck& setup = {});

}  // namespace ccgnn
