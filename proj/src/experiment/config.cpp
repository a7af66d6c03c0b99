#include <fstream>
#include <set>

#include "ccgnn/experiment.hpp"

namespace ccgnn {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, std::string_view what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown " + std::string(what) + " key '" + key + "'");
  }
}

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

const std::set<std::string> kRunKeys{"model",      "k",          "ssl_epochs",        "ssl_lr", "lambda",
                                     "head_epochs", "head_lr",   "head_weight_decay", "widths", "seed",
                                     "folds",       "fold_count", "p_edge",            "p_feat"};

void apply_run_keys(const json& j, RunConfig& cfg) {
  if (j.contains("model")) {
    try {
      cfg.model = parse_model(j.at("model").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad value for 'model': ") + e.what());
    }
  }
  take(j, "k", cfg.k);
  take(j, "ssl_epochs", cfg.ssl_epochs);
  take(j, "ssl_lr", cfg.ssl_lr);
  take(j, "lambda", cfg.lambda);
  take(j, "head_epochs", cfg.head_epochs);
  take(j, "head_lr", cfg.head_lr);
  take(j, "head_weight_decay", cfg.head_weight_decay);
  take(j, "widths", cfg.widths);
  take(j, "seed", cfg.seed);
  take(j, "folds", cfg.folds);
  take(j, "fold_count", cfg.fold_count);
  take(j, "p_edge", cfg.p_edge);
  take(j, "p_feat", cfg.p_feat);
}

}  // namespace

RunConfig run_config_from_json(const json& j, RunConfig base) {
  reject_unknown(j, kRunKeys, "run config");
  apply_run_keys(j, base);
  return base;
}

json run_config_to_json(const RunConfig& c) {
  return json{{"model", model_name(c.model)},
              {"k", c.k},
              {"ssl_epochs", c.ssl_epochs},
              {"ssl_lr", c.ssl_lr},
              {"lambda", c.lambda},
              {"head_epochs", c.head_epochs},
              {"head_lr", c.head_lr},
              {"head_weight_decay", c.head_weight_decay},
              {"widths", c.widths},
              {"seed", c.seed},
              {"folds", c.folds},
              {"fold_count", c.fold_count},
              {"p_edge", c.p_edge},
              {"p_feat", c.p_feat}};
}

SynthConfig synth_config_from_json(const json& j, SynthConfig c) {
  reject_unknown(j,
                 {"sequences", "frames", "latent_dim", "visual_dim", "harmonics", "snr_min_db", "snr_max_db",
                  "visual_noise", "latent_decay", "latent_momentum", "latent_step", "latent_burn_in", "logfb"},
                 "dataset config");
  take(j, "sequences", c.sequences);
  take(j, "frames", c.frames);
  take(j, "latent_dim", c.latent_dim);
  take(j, "visual_dim", c.visual_dim);
  take(j, "harmonics", c.harmonics);
  take(j, "snr_min_db", c.snr_min_db);
  take(j, "snr_max_db", c.snr_max_db);
  take(j, "visual_noise", c.visual_noise);
  take(j, "latent_decay", c.latent_decay);
  take(j, "latent_momentum", c.latent_momentum);
  take(j, "latent_step", c.latent_step);
  take(j, "latent_burn_in", c.latent_burn_in);
  if (j.contains("logfb")) {
    const json& l = j.at("logfb");
    reject_unknown(l, {"sample_rate", "frame_length", "hop", "fft_size", "num_filters", "log_floor"}, "logfb config");
    take(l, "sample_rate", c.logfb.sample_rate);
    take(l, "frame_length", c.logfb.frame_length);
    take(l, "hop", c.logfb.hop);
    take(l, "fft_size", c.logfb.fft_size);
    take(l, "num_filters", c.logfb.num_filters);
    take(l, "log_floor", c.logfb.log_floor);
  }
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void ExperimentManifest::validate() const {
  if (models.empty()) throw ConfigError("manifest lists no models");
  if (ks.empty()) throw ConfigError("manifest lists no k values");
  for (std::size_t k : ks) {
    if (k == 0) throw ConfigError("k values must be positive");
  }
  if (jobs == 0) throw ConfigError("jobs must be at least 1");
  if (data.empty()) throw ConfigError("manifest has no dataset path");
  if (out.empty()) throw ConfigError("manifest has no output directory");
  for (std::size_t f : folds) {
    if (f >= run.fold_count) {
      throw ConfigError("fold " + std::to_string(f) + " >= fold_count " + std::to_string(run.fold_count));
    }
  }
}

ExperimentManifest manifest_from_json(const json& j, const std::filesystem::path& base_dir) {
  std::set<std::string> allowed = kRunKeys;
  allowed.insert({"data", "models", "ks", "out", "jobs"});
  reject_unknown(j, allowed, "manifest");
  ExperimentManifest m;
  json run = json::object();
  for (const auto& [key, value] : j.items()) {
    if (kRunKeys.count(key) && key != "model" && key != "k" && key != "folds" && key != "seed") run[key] = value;
  }
  apply_run_keys(run, m.run);
  if (j.contains("model")) throw ConfigError("manifest uses 'models' (a list), not 'model'");
  if (j.contains("k")) throw ConfigError("manifest uses 'ks' (a list), not 'k'");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() ? base_dir / path : path;
  };
  if (j.contains("data")) m.data = resolve(j.at("data").get<std::string>());
  if (j.contains("out")) m.out = resolve(j.at("out").get<std::string>());
  if (j.contains("models")) {
    m.models.clear();
    for (const auto& name : j.at("models")) {
      try {
        m.models.push_back(parse_model(name.get<std::string>()));
      } catch (const std::exception& e) {
        throw ConfigError(std::string("bad model in manifest: ") + e.what());
      }
    }
  }
  take(j, "ks", m.ks);
  take(j, "folds", m.folds);
  take(j, "seed", m.seed);
  take(j, "jobs", m.jobs);
  return m;
}

}  // namespace ccgnn
