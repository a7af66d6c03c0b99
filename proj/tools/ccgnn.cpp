// ccgnn command-line front end.
//
// Exit codes: 0 success, 1 usage error (bad flag, bad or missing file),
// 2 numerical failure (non-finite loss, failed gradcheck or selftest),
// 3 compare finished with failed cells.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ccgnn/binio.hpp"
#include "ccgnn/checkpoint.hpp"
#include "ccgnn/dataset_io.hpp"
#include "ccgnn/experiment.hpp"
#include "ccgnn/kernels.hpp"
#include "suites.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ccgnn;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kPartial = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

fs::path output_root() {
  const char* env = std::getenv("CCGNN_OUTPUT_ROOT");
  return (env != nullptr && *env != '\0') ? fs::path(env) : fs::path("ccgnn_runs");
}

// Flags shared by the single-run commands. Unset flags leave the file value.
struct RunFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::optional<std::size_t> k;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<double> lambda;
  std::optional<double> weight_decay;
  std::optional<std::size_t> fold;
  std::optional<std::size_t> fold_count;
  std::vector<std::size_t> widths;
  std::optional<std::string> data;
  std::optional<std::string> out;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool head_phase) {
  cmd->add_option("--config", f.config, "JSON file with RunConfig keys")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--model", f.model, "cortical or ccagnn")->check(CLI::IsMember({"cortical", "ccagnn"}));
  cmd->add_option("--k", f.k, "prior frames per node")->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", f.epochs, head_phase ? "head epochs" : "pretraining epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", f.lr, head_phase ? "head learning rate" : "pretraining learning rate")->check(CLI::NonNegativeNumber);
  cmd->add_option("--lambda", f.lambda, "decorrelation weight")->check(CLI::NonNegativeNumber);
  cmd->add_option("--weight-decay", f.weight_decay, "head weight decay")->check(CLI::NonNegativeNumber);
  cmd->add_option("--fold", f.fold, "fold index");
  cmd->add_option("--fold-count", f.fold_count, "number of folds")->check(CLI::PositiveNumber);
  cmd->add_option("--widths", f.widths, "layer widths, comma separated")->delimiter(',');
  cmd->add_option("--data", f.data, "dataset directory");
  cmd->add_option("--out", f.out, "run directory");
}

fs::path run_dir(const RunFlags& f, const char* command) {
  return f.out ? fs::path(*f.out) : output_root() / command;
}

// run.json in the run directory, written by pretrain.
struct RunRecord {
  RunConfig cfg;
  fs::path data;
};

std::optional<RunRecord> read_run_record(const fs::path& dir) {
  if (!fs::exists(dir / "run.json")) return std::nullopt;
  const json j = read_json_file(dir / "run.json");
  if (!j.is_object() || !j.contains("run")) throw ConfigError("run.json in " + dir.string() + " has no 'run' object");
  RunRecord r;
  r.cfg = run_config_from_json(j.at("run"));
  if (j.contains("data")) r.data = j.at("data").get<std::string>();
  return r;
}

void write_run_record(const fs::path& dir, const RunConfig& cfg, const fs::path& data) {
  const json j{{"run", run_config_to_json(cfg)}, {"data", fs::absolute(data).lexically_normal().string()}};
  write_text_file(dir / "run.json", j.dump(2) + "\n");
}

// default < run.json < --config < flags
RunRecord resolve_run(const RunFlags& f, const fs::path& dir, bool head_phase) {
  RunRecord r;
  if (auto rec = read_run_record(dir)) r = *rec;
  if (f.config) r.cfg = run_config_from_json(read_json_file(*f.config), r.cfg);
  if (f.seed) r.cfg.seed = *f.seed;
  if (f.model) r.cfg.model = parse_model(*f.model);
  if (f.k) r.cfg.k = *f.k;
  if (f.epochs) (head_phase ? r.cfg.head_epochs : r.cfg.ssl_epochs) = *f.epochs;
  if (f.lr) (head_phase ? r.cfg.head_lr : r.cfg.ssl_lr) = *f.lr;
  if (f.lambda) r.cfg.lambda = *f.lambda;
  if (f.weight_decay) r.cfg.head_weight_decay = *f.weight_decay;
  if (f.fold) r.cfg.folds = {*f.fold};
  if (f.fold_count) r.cfg.fold_count = *f.fold_count;
  if (!f.widths.empty()) r.cfg.widths = f.widths;
  if (f.data) r.data = *f.data;
  if (r.cfg.folds.size() != 1) throw UsageError("single-run commands take exactly one fold");
  if (r.data.empty()) throw UsageError("no dataset: pass --data");
  try {
    r.cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return r;
}

struct LoadedFold {
  FoldData data;
  std::size_t fold = 0;
  std::uint64_t seed = 0;
};

LoadedFold load_fold(const RunRecord& r) {
  const AVDataset ds = read_dataset(r.data);
  const FoldSplits splits = dataset_folds(ds, r.cfg);
  LoadedFold lf{prepare_fold(ds, splits.folds.at(r.cfg.folds[0])), r.cfg.folds[0], 0};
  lf.seed = cell_seed(r.cfg.seed, r.cfg.model, r.cfg.k, lf.fold);
  return lf;
}

EncoderConfig encoder_from(const ParameterSet& enc, const RunConfig& cfg) {
  EncoderConfig e = infer_encoder_config(enc);
  e.p_edge = cfg.p_edge;
  e.p_feat = cfg.p_feat;
  return e;
}

int cmd_generate(const std::optional<std::string>& config, std::optional<std::size_t> sequences,
                 std::optional<std::size_t> frames, std::uint64_t seed, const std::optional<std::string>& out) {
  SynthConfig c;
  if (config) c = synth_config_from_json(read_json_file(*config));
  if (sequences) c.sequences = *sequences;
  if (frames) c.frames = *frames;
  const fs::path dir = out ? fs::path(*out) : output_root() / "dataset";
  const AVDataset ds = synth_av_generate(c, seed);
  write_dataset(ds, dir);
  std::printf("dataset %s: %zu sequences x %zu frames = %zu samples\n", dir.string().c_str(), ds.sequences.size(),
              c.frames, ds.total_samples());
  return kOk;
}

int cmd_pretrain(const RunFlags& f) {
  const fs::path dir = run_dir(f, "run");
  const RunRecord r = resolve_run(f, dir, false);
  const LoadedFold lf = load_fold(r);
  const SslResult res = pretrain_ssl(lf.data.train, r.cfg, lf.seed);
  fs::create_directories(dir);
  save_checkpoint(res.params, dir / "encoder.ccgn");
  write_text_file(dir / "ssl_history.csv", ssl_history_csv(res.history));
  write_run_record(dir, r.cfg, r.data);
  std::printf("pretrain %s k=%zu fold=%zu: loss %s -> %s over %zu epochs\n", std::string(model_name(r.cfg.model)).c_str(),
              r.cfg.k, lf.fold, format_real(res.history.front().total).c_str(), format_real(res.history.back().total).c_str(),
              res.history.size());
  if (res.standardize_warning) std::printf("warning: a representation column had zero variance\n");
  return kOk;
}

int cmd_train_head(const RunFlags& f, const std::optional<std::string>& encoder_path) {
  const fs::path dir = run_dir(f, "run");
  const RunRecord r = resolve_run(f, dir, true);
  const ParameterSet enc = load_checkpoint(encoder_path ? fs::path(*encoder_path) : dir / "encoder.ccgn");
  const EncoderConfig ecfg = encoder_from(enc, r.cfg);
  const LoadedFold lf = load_fold(r);
  HeadResult details;
  const HeadModel head = fit_head(encode_raw(enc, ecfg, lf.data.train, r.cfg.k), lf.data.train.target,
                                  encode_raw(enc, ecfg, lf.data.validation, r.cfg.k), lf.data.validation.target, r.cfg,
                                  lf.seed, &details);
  fs::create_directories(dir);
  save_checkpoint(head_to_parameters(head), dir / "head.ccgn");
  write_text_file(dir / "head_history.csv", head_history_csv(details.history));
  write_run_record(dir, r.cfg, r.data);
  std::printf("train-head: best validation MSE %s at epoch %zu of %zu\n", format_real(details.best_validation_mse).c_str(),
              details.best_epoch, details.history.size());
  return kOk;
}

int cmd_evaluate(const RunFlags& f, const std::optional<std::string>& encoder_path,
                 const std::optional<std::string>& head_path) {
  const fs::path dir = run_dir(f, "run");
  const RunRecord r = resolve_run(f, dir, true);
  const ParameterSet enc = load_checkpoint(encoder_path ? fs::path(*encoder_path) : dir / "encoder.ccgn");
  const HeadModel head = head_from_parameters(load_checkpoint(head_path ? fs::path(*head_path) : dir / "head.ccgn"));
  const LoadedFold lf = load_fold(r);
  FoldReport rep = assess(lf.data, enc, encoder_from(enc, r.cfg), head, r.cfg.k);
  rep.fold = lf.fold;
  rep.seed = r.cfg.seed;
  fs::create_directories(dir);
  write_text_file(dir / "evaluation.csv", evaluation_csv({&rep}));
  write_text_file(dir / "activation.csv", activation_csv({&rep}));
  std::printf("evaluate: test MSE %s (training-mean baseline %s), AUC audio %.2f visual %.2f\n",
              format_real(rep.test_mse).c_str(), format_real(rep.baseline_mse).c_str(), rep.auc_audio, rep.auc_visual);
  return kOk;
}

struct CompareFlags {
  std::optional<std::string> config;
  std::optional<std::string> data;
  std::optional<std::string> out;
  std::vector<std::string> models;
  std::vector<std::size_t> ks;
  std::vector<std::size_t> folds;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> head_epochs;
  std::optional<double> lr;
  std::optional<double> lambda;
  std::optional<double> weight_decay;
  std::optional<std::size_t> fold_count;
  std::vector<std::size_t> widths;
};

int cmd_compare(const CompareFlags& f) {
  ExperimentManifest m;
  if (f.config) m = manifest_from_json(read_json_file(*f.config), fs::path(*f.config).parent_path());
  if (f.data) m.data = *f.data;
  if (f.out) m.out = *f.out;
  if (m.out.empty()) m.out = output_root() / "compare";
  if (!f.models.empty()) {
    m.models.clear();
    for (const auto& s : f.models) m.models.push_back(parse_model(s));
  }
  if (!f.ks.empty()) m.ks = f.ks;
  if (!f.folds.empty()) m.folds = f.folds;
  if (f.seed) m.seed = *f.seed;
  if (f.jobs) m.jobs = *f.jobs;
  if (f.epochs) m.run.ssl_epochs = *f.epochs;
  if (f.head_epochs) m.run.head_epochs = *f.head_epochs;
  if (f.lr) m.run.ssl_lr = *f.lr;
  if (f.lambda) m.run.lambda = *f.lambda;
  if (f.weight_decay) m.run.head_weight_decay = *f.weight_decay;
  if (f.fold_count) m.run.fold_count = *f.fold_count;
  if (!f.widths.empty()) m.run.widths = f.widths;
  m.validate();
  if (!fs::is_directory(m.data)) throw UsageError("dataset directory " + m.data.string() + " does not exist");
  {
    RunConfig probe = m.run;
    probe.folds.clear();
    try {
      probe.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  const AVDataset ds = read_dataset(m.data);
  const CompareResult res = run_compare(m, ds);
  write_compare_reports(res, m.models, m.ks, m.out);
  std::printf("compare: %zu cells, %zu failed, reports in %s\n", res.cells.size(), res.failures(), m.out.string().c_str());
  for (const auto& c : res.cells) {
    if (!c.report) {
      std::fprintf(stderr, "cell %s k=%zu fold=%zu failed: %s\n", std::string(model_name(c.model)).c_str(), c.k, c.fold,
                   c.error.c_str());
    }
  }
  return res.failures() > 0 ? kPartial : kOk;
}

int cmd_gradcheck(const std::string& model, std::uint64_t seed) {
  const ModelKind m = parse_model(model);
  const GradCheckResult r = encoder_gradcheck(m, seed);
  const bool ok = r.max_relative_error < 1e-4;
  std::printf("gradcheck %s seed=%llu: max relative error %.3e over %zu entries (%s)\n", model.c_str(),
              static_cast<unsigned long long>(seed), r.max_relative_error, r.entries_checked, ok ? "ok" : "FAILED");
  return ok ? kOk : kNumerical;
}

int cmd_selftest(std::uint64_t seed) {
  std::printf("kernels: %s\n", std::string(kernels::active().name).c_str());
  bool all = true;
  for (const auto& c : oracle::run_all(seed)) {
    std::printf("%s %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    all = all && c.passed;
  }
  return all ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cortical GNN and CCA-GNN: synthetic data, training, evaluation"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "write a synthetic audio-visual dataset");
  std::optional<std::string> gen_config, gen_out;
  std::optional<std::size_t> gen_sequences, gen_frames;
  std::uint64_t gen_seed = 0;
  gen->add_option("--config", gen_config, "JSON file with dataset keys")->check(CLI::ExistingFile);
  gen->add_option("--sequences", gen_sequences)->check(CLI::PositiveNumber);
  gen->add_option("--frames", gen_frames)->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out, "dataset directory");

  RunFlags pre_flags, head_flags, eval_flags;
  std::optional<std::string> head_encoder, eval_encoder, eval_head;
  auto* pre = app.add_subcommand("pretrain", "self-supervised encoder training on one fold");
  add_run_flags(pre, pre_flags, false);
  auto* head = app.add_subcommand("train-head", "fit the reconstruction head on a frozen encoder");
  add_run_flags(head, head_flags, true);
  head->add_option("--encoder", head_encoder, "encoder checkpoint (default RUN/encoder.ccgn)")->check(CLI::ExistingFile);
  auto* eval = app.add_subcommand("evaluate", "test MSE and firing rates of a trained run");
  add_run_flags(eval, eval_flags, true);
  eval->add_option("--encoder", eval_encoder)->check(CLI::ExistingFile);
  eval->add_option("--head", eval_head)->check(CLI::ExistingFile);

  CompareFlags cmp_flags;
  auto* cmp = app.add_subcommand("compare", "every (model, k, fold) cell plus summary tables");
  cmp->add_option("--config", cmp_flags.config, "manifest JSON")->check(CLI::ExistingFile);
  cmp->add_option("--data", cmp_flags.data);
  cmp->add_option("--out", cmp_flags.out);
  cmp->add_option("--models", cmp_flags.models)->delimiter(',')->check(CLI::IsMember({"cortical", "ccagnn"}));
  cmp->add_option("--ks", cmp_flags.ks)->delimiter(',')->check(CLI::PositiveNumber);
  cmp->add_option("--folds", cmp_flags.folds)->delimiter(',');
  cmp->add_option("--seed", cmp_flags.seed);
  cmp->add_option("--jobs", cmp_flags.jobs)->check(CLI::PositiveNumber);
  cmp->add_option("--epochs", cmp_flags.epochs, "pretraining epochs")->check(CLI::PositiveNumber);
  cmp->add_option("--head-epochs", cmp_flags.head_epochs)->check(CLI::PositiveNumber);
  cmp->add_option("--lr", cmp_flags.lr, "pretraining learning rate")->check(CLI::NonNegativeNumber);
  cmp->add_option("--lambda", cmp_flags.lambda)->check(CLI::NonNegativeNumber);
  cmp->add_option("--weight-decay", cmp_flags.weight_decay)->check(CLI::NonNegativeNumber);
  cmp->add_option("--fold-count", cmp_flags.fold_count)->check(CLI::PositiveNumber);
  cmp->add_option("--widths", cmp_flags.widths)->delimiter(',');

  std::string gc_model = "cortical";
  std::uint64_t gc_seed = 7;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the full loss");
  gc->add_option("--model", gc_model)->check(CLI::IsMember({"cortical", "ccagnn"}));
  gc->add_option("--seed", gc_seed);

  std::uint64_t st_seed = 7;
  auto* st = app.add_subcommand("selftest", "run the oracle equivalence suites");
  st->add_option("--seed", st_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_config, gen_sequences, gen_frames, gen_seed, gen_out);
    if (pre->parsed()) return cmd_pretrain(pre_flags);
    if (head->parsed()) return cmd_train_head(head_flags, head_encoder);
    if (eval->parsed()) return cmd_evaluate(eval_flags, eval_encoder, eval_head);
    if (cmp->parsed()) return cmd_compare(cmp_flags);
    if (gc->parsed()) return cmd_gradcheck(gc_model, gc_seed);
    if (st->parsed()) return cmd_selftest(st_seed);
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
