#include "ccgnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccgnn/adam.hpp"
#include "ccgnn/rng.hpp"

namespace ccgnn {
namespace {

constexpr std::uint64_t kSplitTag = 0xf01d;
constexpr std::uint64_t kCellTag = 0xce11;
constexpr std::uint64_t kEncoderInitTag = 1;
constexpr std::uint64_t kAugmentTag = 2;
constexpr std::uint64_t kHeadTag = 3;

void require_finite(double v, std::string_view phase, std::size_t epoch, std::string_view term) {
  if (!std::isfinite(v)) {
    throw NumericalError(std::string(phase) + ": non-finite " + std::string(term) + " at epoch " + std::to_string(epoch));
  }
}

void require_finite(const std::vector<Matrix>& grads, std::string_view phase, std::size_t epoch) {
  for (const Matrix& g : grads) {
    if (!all_finite(g)) throw NumericalError(std::string(phase) + ": non-finite gradient at epoch " + std::to_string(epoch));
  }
}

Matrix stack_sequences(const AVDataset& ds, const std::vector<std::size_t>& ids, Matrix AVSequence::*field) {
  std::vector<Matrix> parts;
  parts.reserve(ids.size());
  for (std::size_t id : ids) {
    if (id >= ds.sequences.size()) throw std::out_of_range("sequence id " + std::to_string(id) + " out of range");
    parts.push_back(ds.sequences[id].*field);
  }
  return vstack(parts);
}

SplitData raw_split(const AVDataset& ds, const std::vector<std::size_t>& ids) {
  if (ids.empty()) throw std::invalid_argument("prepare_fold: empty split");
  SplitData s;
  s.sequence_ids = ids;
  s.frames = ds.sequences[ids.front()].clean.rows();
  s.audio = stack_sequences(ds, ids, &AVSequence::noisy);
  s.visual = stack_sequences(ds, ids, &AVSequence::visual);
  s.target = stack_sequences(ds, ids, &AVSequence::clean);
  if (s.audio.rows() != ids.size() * s.frames) throw std::invalid_argument("prepare_fold: sequences differ in length");
  return s;
}

void apply_scaling(SplitData& s, const Scaling& sc) {
  s.audio = sc.audio.apply(s.audio);
  s.visual = sc.visual.apply(s.visual);
  s.target = sc.target.apply(s.target);
}

Matrix predict(const Matrix& features, const HeadParams& head) {
  Matrix out = matmul(features, head.weight);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += head.bias(0, j);
  }
  return out;
}

std::size_t model_index(ModelKind m) noexcept { return m == ModelKind::Cortical ? 0 : 1; }

Matrix row_vector(const std::vector<double>& v) { return Matrix(1, v.size(), v); }

}  // namespace

ColumnScaler ColumnScaler::standard(const Matrix& m) {
  const std::size_t n = m.rows();
  ColumnScaler s{std::vector<double>(m.cols(), 0.0), std::vector<double>(m.cols(), 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) s.shift[j] += r[j];
  }
  for (double& v : s.shift) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) s.scale[j] += (r[j] - s.shift[j]) * (r[j] - s.shift[j]);
  }
  for (double& v : s.scale) {
    v = std::sqrt(v / static_cast<double>(n));
    if (v == 0.0) v = 1.0;
  }
  return s;
}

ColumnScaler ColumnScaler::min_max(const Matrix& m) {
  ColumnScaler s;
  s.shift.assign(m.cols(), 0.0);
  std::vector<double> hi(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) s.shift[j] = hi[j] = m(0, j);
  for (std::size_t i = 1; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      s.shift[j] = std::min(s.shift[j], m(i, j));
      hi[j] = std::max(hi[j], m(i, j));
    }
  }
  s.scale.resize(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) s.scale[j] = hi[j] > s.shift[j] ? hi[j] - s.shift[j] : 1.0;
  return s;
}

Matrix ColumnScaler::apply(const Matrix& m) const {
  if (m.cols() != shift.size() || m.cols() != scale.size()) {
    throw ShapeError("ColumnScaler: fitted on " + std::to_string(shift.size()) + " columns, got " + m.shape_string());
  }
  Matrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = (r[j] - shift[j]) / scale[j];
  }
  return out;
}

EncoderConfig RunConfig::encoder_config(std::size_t audio_dim, std::size_t visual_dim) const {
  EncoderConfig e;
  e.model = model;
  e.widths = widths;
  e.audio_dim = audio_dim;
  e.visual_dim = visual_dim;
  e.p_edge = p_edge;
  e.p_feat = p_feat;
  return e;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid run config: " + what); };
  if (k == 0) fail("k must be positive");
  if (ssl_epochs == 0) fail("ssl_epochs must be positive");
  if (head_epochs == 0) fail("head_epochs must be positive");
  if (!(ssl_lr >= 0.0) || !std::isfinite(ssl_lr)) fail("ssl_lr must be a non-negative number");
  if (!(head_lr >= 0.0) || !std::isfinite(head_lr)) fail("head_lr must be a non-negative number");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be a non-negative number");
  if (!(head_weight_decay >= 0.0) || !std::isfinite(head_weight_decay)) fail("head_weight_decay must be non-negative");
  if (widths.empty() || std::find(widths.begin(), widths.end(), std::size_t{0}) != widths.end()) {
    fail("widths must be a non-empty list of positive sizes");
  }
  if (fold_count == 0) fail("fold_count must be positive");
  for (std::size_t f : folds) {
    if (f >= fold_count) fail("fold " + std::to_string(f) + " >= fold_count " + std::to_string(fold_count));
  }
  if (!(p_edge >= 0.0 && p_edge < 1.0) || !(p_feat >= 0.0 && p_feat < 1.0)) fail("augmentation probabilities must lie in [0, 1)");
}

TemporalGraph SplitData::graph(std::size_t k) const {
  return build_segmented_graph(sequence_ids.size(), frames, k);
}

FoldSplits dataset_folds(const AVDataset& ds, const RunConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, {kSplitTag}));
  return split_folds(ds.sequences.size(), cfg.fold_count, {0.6, 0.2, 0.2}, rng);
}

FoldData prepare_fold(const AVDataset& ds, const FoldSplit& split) {
  FoldData d{raw_split(ds, split.train), raw_split(ds, split.validation), raw_split(ds, split.test), {}};
  d.scaling.audio = ColumnScaler::standard(d.train.audio);
  d.scaling.visual = ColumnScaler::standard(d.train.visual);
  d.scaling.target = ColumnScaler::min_max(d.train.target);
  apply_scaling(d.train, d.scaling);
  apply_scaling(d.validation, d.scaling);
  apply_scaling(d.test, d.scaling);
  return d;
}

SslResult pretrain_ssl(const SplitData& train, const RunConfig& cfg, std::uint64_t seed) {
  Rng init_rng(derive_seed(seed, {kEncoderInitTag}));
  const EncoderConfig ecfg = cfg.encoder_config(train.audio.cols(), train.visual.cols());
  return pretrain_ssl(train, cfg, seed, init_encoder(ecfg, init_rng));
}

SslResult pretrain_ssl(const SplitData& train, const RunConfig& cfg, std::uint64_t seed, ParameterSet init) {
  cfg.validate();
  const EncoderConfig ecfg = cfg.encoder_config(train.audio.cols(), train.visual.cols());
  const TemporalGraph g = train.graph(cfg.k);
  const CcaConfig cca{cfg.lambda};
  Rng aug_rng(derive_seed(seed, {kAugmentTag}));

  SslResult res;
  res.params = std::move(init);
  AdamState state = AdamState::for_parameters(res.params.values());
  res.history.reserve(cfg.ssl_epochs);
  for (std::size_t epoch = 0; epoch < cfg.ssl_epochs; ++epoch) {
    Tape tape;
    BoundParameters bound(tape, res.params);
    const SslLossNodes l = ssl_loss(tape, bound, ecfg, cca, g, train.audio, train.visual, aug_rng);
    SslHistoryRow row{epoch, tape.value(l.total).item(), tape.value(l.invariance).item(),
                      tape.value(l.decorrelation).item()};
    require_finite(row.invariance, "pretrain", epoch, "invariance term");
    require_finite(row.decorrelation, "pretrain", epoch, "decorrelation term");
    require_finite(row.total, "pretrain", epoch, "total loss");
    res.standardize_warning = res.standardize_warning || tape.standardize_warning();
    res.history.push_back(row);
    const std::vector<Matrix> grads = bound.collect(tape.backward(l.total));
    require_finite(grads, "pretrain", epoch);
    adam_step(res.params.values(), grads, state, cfg.ssl_lr);
  }
  return res;
}

Matrix encode_raw(const ParameterSet& encoder, const EncoderConfig& ecfg, const SplitData& split, std::size_t k,
                  ActivationTrace* trace) {
  Tape tape;
  BoundParameters bound(tape, encoder);
  const StackOutput out = encode(tape, bound, ecfg, split.graph(k), split.audio, split.visual);
  ActivationTrace captured = capture_trace(tape, out.trace);
  const std::size_t last = ecfg.widths.size() - 1;
  Matrix raw = hstack(captured.find(last, "audio", "output").values, captured.find(last, "visual", "output").values);
  if (trace != nullptr) *trace = std::move(captured);
  return raw;
}

Matrix head_predict(const HeadModel& head, const Matrix& raw_features) {
  return predict(head.features.apply(raw_features), head.params);
}

HeadResult train_head(const Matrix& train_features, const Matrix& train_targets, const Matrix& val_features,
                      const Matrix& val_targets, const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (train_features.rows() != train_targets.rows() || val_features.rows() != val_targets.rows() ||
      train_features.cols() != val_features.cols() || train_targets.cols() != val_targets.cols()) {
    throw ShapeError("train_head: features/targets disagree (train " + train_features.shape_string() + " -> " +
                     train_targets.shape_string() + ", validation " + val_features.shape_string() + " -> " +
                     val_targets.shape_string() + ")");
  }
  (void)seed;
  // Start at the mean predictor: zero weights, bias = training-target mean.
  Matrix bias(1, train_targets.cols());
  for (std::size_t i = 0; i < train_targets.rows(); ++i) {
    for (std::size_t j = 0; j < bias.cols(); ++j) bias(0, j) += train_targets(i, j);
  }
  for (double& v : bias.data()) v /= static_cast<double>(train_targets.rows());
  std::vector<Matrix> params{Matrix(train_features.cols(), train_targets.cols()), bias};
  AdamState state = AdamState::for_parameters(params);

  HeadResult res;
  res.history.reserve(cfg.head_epochs);
  res.best_validation_mse = INFINITY;
  for (std::size_t epoch = 0; epoch < cfg.head_epochs; ++epoch) {
    Tape tape;
    const NodeId w = tape.parameter(params[0]);
    const NodeId b = tape.parameter(params[1]);
    const NodeId loss = mse(tape, reconstruct(tape, tape.constant(train_features), w, b), tape.constant(train_targets));
    const HeadParams current{params[0], params[1]};
    HeadHistoryRow row{epoch, tape.value(loss).item(), mse(predict(val_features, current), val_targets)};
    require_finite(row.train_mse, "train-head", epoch, "training MSE");
    require_finite(row.validation_mse, "train-head", epoch, "validation MSE");
    res.history.push_back(row);
    if (row.validation_mse < res.best_validation_mse) {
      res.best_validation_mse = row.validation_mse;
      res.best_epoch = epoch;
      res.params = current;
    }
    const Gradients g = tape.backward(loss);
    std::vector<Matrix> grads{g.at(w), g.at(b)};
    require_finite(grads, "train-head", epoch);
    adam_step(params, grads, state, cfg.head_lr, cfg.head_weight_decay);
  }
  return res;
}

ParameterSet head_to_parameters(const HeadModel& head) {
  ParameterSet p;
  p.add("head.weight", head.params.weight);
  p.add("head.bias", head.params.bias);
  p.add("head.feature_shift", row_vector(head.features.shift));
  p.add("head.feature_scale", row_vector(head.features.scale));
  return p;
}

HeadModel head_from_parameters(const ParameterSet& params) {
  for (const char* name : {"head.weight", "head.bias", "head.feature_shift", "head.feature_scale"}) {
    if (!params.contains(name)) throw std::invalid_argument(std::string("head checkpoint lacks ") + name);
  }
  HeadModel h;
  h.params = HeadParams{params["head.weight"], params["head.bias"]};
  const Matrix& shift = params["head.feature_shift"];
  const Matrix& scale = params["head.feature_scale"];
  const std::size_t in = h.params.weight.rows();
  if (h.params.bias.rows() != 1 || h.params.bias.cols() != h.params.weight.cols() || shift.rows() != 1 ||
      shift.cols() != in || !scale.same_shape(shift)) {
    throw ShapeError("head checkpoint arrays have inconsistent shapes");
  }
  h.features.shift.assign(shift.data().begin(), shift.data().end());
  h.features.scale.assign(scale.data().begin(), scale.data().end());
  return h;
}

HeadModel fit_head(const Matrix& train_raw, const Matrix& train_targets, const Matrix& val_raw,
                   const Matrix& val_targets, const RunConfig& cfg, std::uint64_t seed, HeadResult* details) {
  HeadModel model;
  model.features = ColumnScaler::standard(train_raw);
  HeadResult r = train_head(model.features.apply(train_raw), train_targets, model.features.apply(val_raw), val_targets, cfg, seed);
  model.params = r.params;
  if (details != nullptr) *details = std::move(r);
  return model;
}

std::uint64_t cell_seed(std::uint64_t base, ModelKind model, std::size_t k, std::size_t fold) noexcept {
  return derive_seed(base, {kCellTag, model_index(model), k, fold});
}

FoldReport assess(const FoldData& data, const ParameterSet& encoder, const EncoderConfig& ecfg, const HeadModel& head,
                  std::size_t k) {
  FoldReport rep;
  rep.model = ecfg.model;
  rep.k = k;
  ActivationTrace trace;
  const Matrix raw = encode_raw(encoder, ecfg, data.test, k, &trace);
  rep.test_mse = mse(head_predict(head, raw), data.test.target);

  Matrix mean_row(1, data.train.target.cols());
  for (std::size_t i = 0; i < data.train.target.rows(); ++i) {
    for (std::size_t j = 0; j < mean_row.cols(); ++j) mean_row(0, j) += data.train.target(i, j);
  }
  for (double& v : mean_row.data()) v /= static_cast<double>(data.train.target.rows());
  rep.baseline_mse = mse(vstack(std::vector<Matrix>(data.test.target.rows(), mean_row)), data.test.target);

  rep.rates_audio = firing_rates(trace.find(0, "audio", "output"));
  rep.rates_visual = firing_rates(trace.find(0, "visual", "output"));
  rep.auc_audio = activation_auc(rep.rates_audio);
  rep.auc_visual = activation_auc(rep.rates_visual);
  return rep;
}

FoldReport evaluate_fold(const AVDataset& ds, std::size_t fold, const RunConfig& cfg) {
  cfg.validate();
  const FoldSplits splits = dataset_folds(ds, cfg);
  if (fold >= splits.folds.size()) throw std::out_of_range("fold " + std::to_string(fold) + " does not exist");
  return evaluate_fold(prepare_fold(ds, splits.folds[fold]), fold, cfg);
}

FoldReport evaluate_fold(const FoldData& data, std::size_t fold, const RunConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = cell_seed(cfg.seed, cfg.model, cfg.k, fold);
  const EncoderConfig ecfg = cfg.encoder_config(data.train.audio.cols(), data.train.visual.cols());
  SslResult ssl = pretrain_ssl(data.train, cfg, seed);
  HeadResult head;
  const HeadModel model = fit_head(encode_raw(ssl.params, ecfg, data.train, cfg.k), data.train.target,
                                   encode_raw(ssl.params, ecfg, data.validation, cfg.k), data.validation.target, cfg,
                                   seed, &head);

  FoldReport rep = assess(data, ssl.params, ecfg, model, cfg.k);
  rep.fold = fold;
  rep.seed = cfg.seed;
  rep.best_head_epoch = head.best_epoch;
  rep.ssl_history = std::move(ssl.history);
  rep.head_history = std::move(head.history);
  rep.standardize_warning = ssl.standardize_warning;
  return rep;
}


GradCheckResult encoder_gradcheck(ModelKind model, std::uint64_t seed, const EncoderGradCheck& setup) {
  EncoderConfig ecfg;
  ecfg.model = model;
  ecfg.widths = setup.widths;
  ecfg.audio_dim = setup.audio_dim;
  ecfg.visual_dim = setup.visual_dim;

  Rng rng(derive_seed(seed, {kEncoderInitTag}));
  const ParameterSet init = init_encoder(ecfg, rng);
  Rng data_rng(derive_seed(seed, {0xda7a}));
  const Matrix x_a = random_normal(setup.nodes, setup.audio_dim, 1.0, data_rng);
  const Matrix x_v = random_normal(setup.nodes, setup.visual_dim, 1.0, data_rng);
  const TemporalGraph g = build_prior_frame_graph(setup.nodes, setup.k);
  const CcaConfig cca{setup.lambda};
  const std::uint64_t aug_seed = derive_seed(seed, {kAugmentTag});

  const LossBuilder build = [&](Tape& tape, std::span<const NodeId> ids) {
    const BoundParameters bound(init, std::vector<NodeId>(ids.begin(), ids.end()));
    Rng aug(aug_seed);
    return ssl_loss(tape, bound, ecfg, cca, g, x_a, x_v, aug).total;
  };
  return finite_difference_check(build, init.values(), setup.step);
}

}  // namespace ccgnn
