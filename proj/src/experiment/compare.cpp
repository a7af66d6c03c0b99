#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include "ccgnn/binio.hpp"
#include "ccgnn/experiment.hpp"
#include "ccgnn/stats.hpp"

namespace ccgnn {
namespace {

namespace fs = std::filesystem;

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string cell_stem(ModelKind m, std::size_t k, std::size_t fold) {
  return std::string(model_name(m)) + "_k" + std::to_string(k) + "_fold" + std::to_string(fold);
}

std::string csv_escape(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Test MSE of `model` at `k`, keyed by fold.
std::map<std::size_t, double> fold_mse(const std::vector<CellResult>& cells, ModelKind model, std::size_t k) {
  std::map<std::size_t, double> out;
  for (const auto& c : cells) {
    if (c.model == model && c.k == k && c.report) out[c.fold] = c.report->test_mse;
  }
  return out;
}

std::optional<double> paired_p(const std::map<std::size_t, double>& a, const std::map<std::size_t, double>& b) {
  std::vector<double> xa, xb;
  for (const auto& [fold, v] : a) {
    auto it = b.find(fold);
    if (it == b.end()) continue;
    xa.push_back(v);
    xb.push_back(it->second);
  }
  try {
    return wilcoxon_signed_rank(xa, xb).p_two_sided;
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

}  // namespace

std::size_t CompareResult::failures() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const CellResult& c) { return !c.report; }));
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  binio::atomic_write(path, [&](std::ostream& os) { os << text; });
}

std::string ssl_history_csv(const std::vector<SslHistoryRow>& rows) {
  std::string s = "epoch,loss_total,loss_invariance,loss_decorrelation\n";
  for (const auto& r : rows) {
    s += std::to_string(r.epoch) + "," + format_real(r.total) + "," + format_real(r.invariance) + "," +
         format_real(r.decorrelation) + "\n";
  }
  return s;
}

std::string head_history_csv(const std::vector<HeadHistoryRow>& rows) {
  std::string s = "epoch,train_mse,validation_mse\n";
  for (const auto& r : rows) {
    s += std::to_string(r.epoch) + "," + format_real(r.train_mse) + "," + format_real(r.validation_mse) + "\n";
  }
  return s;
}

std::string evaluation_csv(const std::vector<const FoldReport*>& reports) {
  std::string s = "fold,model,k,seed,test_mse\n";
  for (const FoldReport* r : reports) {
    s += std::to_string(r->fold) + "," + std::string(model_name(r->model)) + "," + std::to_string(r->k) + "," +
         std::to_string(r->seed) + "," + format_real(r->test_mse) + "\n";
  }
  return s;
}

std::string activation_csv(const std::vector<const FoldReport*>& reports) {
  // Rates of the same (model, k) are averaged over folds.
  struct Acc {
    std::vector<double> audio, visual;
    std::size_t n = 0;
  };
  std::vector<std::pair<std::pair<ModelKind, std::size_t>, Acc>> groups;
  for (const FoldReport* r : reports) {
    auto key = std::make_pair(r->model, r->k);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, Acc{std::vector<double>(r->rates_audio.size()), std::vector<double>(r->rates_visual.size()), 0}});
      it = groups.end() - 1;
    }
    if (it->second.audio.size() != r->rates_audio.size() || it->second.visual.size() != r->rates_visual.size()) {
      throw std::invalid_argument("activation_csv: reports of one model/k disagree in width");
    }
    for (std::size_t i = 0; i < r->rates_audio.size(); ++i) it->second.audio[i] += r->rates_audio[i];
    for (std::size_t i = 0; i < r->rates_visual.size(); ++i) it->second.visual[i] += r->rates_visual[i];
    ++it->second.n;
  }
  std::string s = "model,k,modality,neuron_id,rate\n";
  for (const auto& [key, acc] : groups) {
    const std::string prefix = std::string(model_name(key.first)) + "," + std::to_string(key.second) + ",";
    const double n = static_cast<double>(acc.n);
    for (std::size_t i = 0; i < acc.audio.size(); ++i) {
      s += prefix + "audio," + std::to_string(i) + "," + format_real(acc.audio[i] / n) + "\n";
    }
    for (std::size_t i = 0; i < acc.visual.size(); ++i) {
      s += prefix + "visual," + std::to_string(i) + "," + format_real(acc.visual[i] / n) + "\n";
    }
  }
  return s;
}

std::vector<SummaryRow> summarize(const std::vector<CellResult>& cells, const std::vector<ModelKind>& models,
                                  const std::vector<std::size_t>& ks) {
  std::vector<SummaryRow> rows;
  for (ModelKind m : models) {
    for (std::size_t k : ks) {
      SummaryRow row;
      row.model = m;
      row.k = k;
      std::vector<double> mse, auc_a, auc_v;
      for (const auto& c : cells) {
        if (c.model != m || c.k != k || !c.report) continue;
        mse.push_back(c.report->test_mse);
        auc_a.push_back(c.report->auc_audio);
        auc_v.push_back(c.report->auc_visual);
      }
      row.folds = mse.size();
      if (!mse.empty()) {
        row.mse_mean = mean_of(mse);
        row.mse_std = sample_std(mse);
        row.auc_audio = mean_of(auc_a);
        row.auc_visual = mean_of(auc_v);
      }
      rows.push_back(row);
    }
  }
  // Each row is tested against the best (lowest mean) other model at its k.
  for (std::size_t k : ks) {
    std::vector<SummaryRow*> at_k;
    for (auto& r : rows) {
      if (r.k == k && r.folds > 0) at_k.push_back(&r);
    }
    std::stable_sort(at_k.begin(), at_k.end(), [](const SummaryRow* a, const SummaryRow* b) { return a->mse_mean < b->mse_mean; });
    for (SummaryRow* r : at_k) {
      const SummaryRow* rival = nullptr;
      for (const SummaryRow* o : at_k) {
        if (o != r) {
          rival = o;
          break;
        }
      }
      if (rival == nullptr) continue;
      r->wilcoxon_p = paired_p(fold_mse(cells, r->model, k), fold_mse(cells, rival->model, k));
    }
    if (at_k.size() >= 2 && at_k[0]->wilcoxon_p && *at_k[0]->wilcoxon_p < 0.05) at_k[0]->best = true;
  }
  return rows;
}

CompareResult run_compare(const ExperimentManifest& manifest, const AVDataset& ds) {
  manifest.validate();
  RunConfig base = manifest.run;
  base.seed = manifest.seed;
  base.folds.clear();
  const FoldSplits splits = dataset_folds(ds, base);
  std::vector<std::size_t> folds = manifest.folds;
  if (folds.empty()) {
    for (std::size_t f = 0; f < splits.folds.size(); ++f) folds.push_back(f);
  }

  std::map<std::size_t, FoldData> fold_data;
  for (std::size_t f : folds) {
    if (f >= splits.folds.size()) throw ConfigError("fold " + std::to_string(f) + " does not exist");
    fold_data.emplace(f, prepare_fold(ds, splits.folds[f]));
  }

  CompareResult result;
  for (ModelKind m : manifest.models) {
    for (std::size_t k : manifest.ks) {
      for (std::size_t f : folds) result.cells.push_back(CellResult{m, k, f, std::nullopt, {}, false});
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < result.cells.size(); i = next.fetch_add(1)) {
      CellResult& cell = result.cells[i];
      RunConfig cfg = base;
      cfg.model = cell.model;
      cfg.k = cell.k;
      cfg.folds = {cell.fold};
      try {
        cell.report = evaluate_fold(fold_data.at(cell.fold), cell.fold, cfg);
      } catch (const NumericalError& e) {
        cell.error = e.what();
        cell.numerical_failure = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  const std::size_t n_threads = std::min(manifest.jobs, std::max<std::size_t>(result.cells.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  result.summary = summarize(result.cells, manifest.models, manifest.ks);
  return result;
}

void write_compare_reports(const CompareResult& result, const std::vector<ModelKind>& models,
                           const std::vector<std::size_t>& ks, const fs::path& dir) {
  fs::create_directories(dir / "history");
  std::vector<const FoldReport*> ok;
  for (const auto& c : result.cells) {
    if (!c.report) continue;
    ok.push_back(&*c.report);
    const std::string stem = cell_stem(c.model, c.k, c.fold);
    write_text_file(dir / "history" / (stem + "_ssl.csv"), ssl_history_csv(c.report->ssl_history));
    write_text_file(dir / "history" / (stem + "_head.csv"), head_history_csv(c.report->head_history));
  }
  write_text_file(dir / "evaluation.csv", evaluation_csv(ok));
  write_text_file(dir / "activation.csv", activation_csv(ok));

  std::string summary = "model,k,mse_mean,mse_std,auc_audio,auc_visual,wilcoxon_p\n";
  for (const auto& r : result.summary) {
    if (r.folds == 0) continue;
    summary += std::string(model_name(r.model)) + "," + std::to_string(r.k) + "," + format_real(r.mse_mean) + "," +
               format_real(r.mse_std) + "," + format_real(r.auc_audio) + "," + format_real(r.auc_visual) + "," +
               (r.wilcoxon_p ? format_real(*r.wilcoxon_p) : std::string("NA")) + "\n";
  }
  write_text_file(dir / "summary.csv", summary);

  auto find_row = [&](ModelKind m, std::size_t k) -> const SummaryRow* {
    for (const auto& r : result.summary) {
      if (r.model == m && r.k == k && r.folds > 0) return &r;
    }
    return nullptr;
  };
  auto cell_text = [](const std::string& s, std::size_t width) {
    return s + std::string(width > s.size() ? width - s.size() : 1, ' ');
  };

  std::ostringstream mse_table;
  mse_table << "Test MSE, mean +/- sample std over folds (* = lowest mean, Wilcoxon p < 0.05)\n";
  mse_table << cell_text("k", 6);
  for (ModelKind m : models) mse_table << cell_text(std::string(model_name(m)), 26);
  mse_table << "\n";
  std::ostringstream auc_table;
  auc_table << "Hidden-block firing-rate AUC (trapezoid over neuron index), mean over folds\n";
  auc_table << cell_text("k", 6);
  for (const char* modality : {"audio", "visual"}) {
    for (ModelKind m : models) auc_table << cell_text(std::string(modality) + ":" + std::string(model_name(m)), 20);
  }
  auc_table << "\n";
  for (std::size_t k : ks) {
    mse_table << cell_text(std::to_string(k), 6);
    auc_table << cell_text(std::to_string(k), 6);
    for (ModelKind m : models) {
      const SummaryRow* r = find_row(m, k);
      char buf[64] = "-";
      if (r != nullptr) std::snprintf(buf, sizeof buf, "%.4f+/-%.4f%s", r->mse_mean, r->mse_std, r->best ? "*" : "");
      mse_table << cell_text(buf, 26);
    }
    for (int modality = 0; modality < 2; ++modality) {
      for (ModelKind m : models) {
        const SummaryRow* r = find_row(m, k);
        char buf[32] = "-";
        if (r != nullptr) std::snprintf(buf, sizeof buf, "%.2f", modality == 0 ? r->auc_audio : r->auc_visual);
        auc_table << cell_text(buf, 20);
      }
    }
    mse_table << "\n";
    auc_table << "\n";
  }
  write_text_file(dir / "mse_table.txt", mse_table.str());
  write_text_file(dir / "auc_table.txt", auc_table.str());

  const fs::path failures = dir / "failures.csv";
  if (result.failures() > 0) {
    std::string s = "model,k,fold,numerical,error\n";
    for (const auto& c : result.cells) {
      if (c.report) continue;
      s += std::string(model_name(c.model)) + "," + std::to_string(c.k) + "," + std::to_string(c.fold) + "," +
           (c.numerical_failure ? "1" : "0") + "," + csv_escape(c.error) + "\n";
    }
    write_text_file(failures, s);
  } else {
    fs::remove(failures);
  }
}

}  // namespace ccgnn
