#pragma once

// Configuration files, report writers and the fold x k x model comparison.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccgnn/features.hpp"
#include "ccgnn/trainer.hpp"

namespace ccgnn {

/// Bad configuration content; reported as a usage error.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Keys are the RunConfig field names. Unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
nlohmann::json run_config_to_json(const RunConfig& cfg);

/// Keys are the SynthConfig field names (logfb nested). Unknown keys rejected.
SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig base = {});

nlohmann::json read_json_file(const std::filesystem::path& path);

struct ExperimentManifest {
  std::filesystem::path data;
  std::vector<ModelKind> models{ModelKind::Cortical, ModelKind::CcaGnn};
  std::vector<std::size_t> ks{3, 5, 7, 10, 15, 20, 25, 30};
  std::vector<std::size_t> folds;  // empty: every fold
  std::uint64_t seed = 0;
  std::filesystem::path out;
  RunConfig run;  // hyperparameters shared by every cell; model/k/folds/seed ignored
  std::size_t jobs = 1;

  void validate() const;
};

/// Manifest keys: data, models, ks, folds, seed, out, jobs, plus any RunConfig
/// key. Relative paths resolve against `base_dir`.
ExperimentManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

struct CellResult {
  ModelKind model = ModelKind::Cortical;
  std::size_t k = 0;
  std::size_t fold = 0;
  std::optional<FoldReport> report;
  std::string error;
  bool numerical_failure = false;
};

struct SummaryRow {
  ModelKind model = ModelKind::Cortical;
  std::size_t k = 0;
  std::size_t folds = 0;
  double mse_mean = 0.0;
  double mse_std = 0.0;  // sample standard deviation over folds
  double auc_audio = 0.0;
  double auc_visual = 0.0;
  std::optional<double> wilcoxon_p;  // against the best other model at this k
  bool best = false;                 // lowest mean at this k, significantly so
};

struct CompareResult {
  std::vector<CellResult> cells;  // manifest order: model, k, fold
  std::vector<SummaryRow> summary;
  std::size_t failures() const;
};

/// Runs every cell on `jobs` worker threads; results do not depend on `jobs`.
CompareResult run_compare(const ExperimentManifest& manifest, const AVDataset& ds);

/// Summary statistics over successful cells, grouped by (model, k).
std::vector<SummaryRow> summarize(const std::vector<CellResult>& cells, const std::vector<ModelKind>& models,
                                  const std::vector<std::size_t>& ks);

/// Writes evaluation.csv, activation.csv, summary.csv, mse_table.txt,
/// auc_table.txt, history/ and (when cells failed) failures.csv under `dir`.
void write_compare_reports(const CompareResult& result, const std::vector<ModelKind>& models,
                           const std::vector<std::size_t>& ks, const std::filesystem::path& dir);

// CSV fragments shared with the single-run commands.
std::string format_real(double v);
std::string ssl_history_csv(const std::vector<SslHistoryRow>& rows);
std::string head_history_csv(const std::vector<HeadHistoryRow>& rows);
std::string evaluation_csv(const std::vector<const FoldReport*>& reports);
std::string activation_csv(const std::vector<const FoldReport*>& reports);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ccgnn
