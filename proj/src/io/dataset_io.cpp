#include "ccgnn/dataset_io.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "ccgnn/binio.hpp"

namespace ccgnn {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sequence_file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "seq_%05zu.avds", i);
  return buf;
}

json manifest_json(const AVDataset& ds) {
  const SynthConfig& c = ds.config;
  json snr = json::array();
  json files = json::array();
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    snr.push_back(ds.sequences[i].snr_db);
    files.push_back(sequence_file_name(i));
  }
  return json{
      {"format", "AVDS"},
      {"version", kDatasetVersion},
      {"seed", ds.seed},
      {"sequences", ds.sequences.size()},
      {"frames", c.frames},
      {"total_samples", ds.total_samples()},
      {"audio_dim", c.logfb.num_filters},
      {"visual_dim", c.visual_dim},
      {"latent_dim", c.latent_dim},
      {"harmonics", c.harmonics},
      {"snr_min_db", c.snr_min_db},
      {"snr_max_db", c.snr_max_db},
      {"visual_noise", c.visual_noise},
      {"latent_decay", c.latent_decay},
      {"latent_momentum", c.latent_momentum},
      {"latent_step", c.latent_step},
      {"latent_burn_in", c.latent_burn_in},
      {"logfb",
       {{"sample_rate", c.logfb.sample_rate},
        {"frame_length", c.logfb.frame_length},
        {"hop", c.logfb.hop},
        {"fft_size", c.logfb.fft_size},
        {"num_filters", c.logfb.num_filters},
        {"log_floor", c.logfb.log_floor}}},
      {"sequence_snr_db", snr},
      {"files", files},
  };
}

}  // namespace

void write_sequence_file(const AVSequence& seq, const fs::path& path) {
  binio::atomic_write(path, [&](std::ostream& os) {
    binio::write_magic(os, "AVDS");
    binio::write_u32(os, kDatasetVersion);
    binio::write_named_array(os, "clean", seq.clean);
    binio::write_named_array(os, "noisy", seq.noisy);
    binio::write_named_array(os, "visual", seq.visual);
  });
}

AVSequence read_sequence_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open sequence file " + path.string());
  const std::string what = "sequence file " + path.string();
  binio::expect_magic(is, "AVDS", what);
  const std::uint32_t version = binio::read_u32(is, what);
  if (version != kDatasetVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(version) + " in " + path.string());
  }
  AVSequence seq;
  for (const char* expected : {"clean", "noisy", "visual"}) {
    auto [name, value] = binio::read_named_array(is, what);
    if (name != expected) throw FormatError("expected array '" + std::string(expected) + "' in " + what + ", found '" + name + "'");
    if (name == std::string_view("clean")) seq.clean = std::move(value);
    else if (name == std::string_view("noisy")) seq.noisy = std::move(value);
    else seq.visual = std::move(value);
  }
  if (seq.clean.rows() != seq.noisy.rows() || seq.clean.cols() != seq.noisy.cols() || seq.visual.rows() != seq.clean.rows()) {
    throw FormatError("inconsistent array shapes in " + what);
  }
  return seq;
}

void write_dataset(const AVDataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) write_sequence_file(ds.sequences[i], dir / sequence_file_name(i));
  const std::string text = manifest_json(ds).dump(2) + "\n";
  binio::atomic_write(dir / "manifest.json", [&](std::ostream& os) { os << text; });
}

AVDataset read_dataset(const fs::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw std::runtime_error("no manifest.json in " + dir.string());
  json m;
  try {
    m = json::parse(is);
    AVDataset ds;
    if (m.at("version").get<std::uint32_t>() != kDatasetVersion) throw FormatError("unsupported dataset manifest version in " + dir.string());
    ds.seed = m.at("seed").get<std::uint64_t>();
    SynthConfig& c = ds.config;
    c.sequences = m.at("sequences").get<std::size_t>();
    c.frames = m.at("frames").get<std::size_t>();
    c.visual_dim = m.at("visual_dim").get<std::size_t>();
    c.latent_dim = m.value("latent_dim", c.latent_dim);
    c.harmonics = m.value("harmonics", c.harmonics);
    c.snr_min_db = m.value("snr_min_db", c.snr_min_db);
    c.snr_max_db = m.value("snr_max_db", c.snr_max_db);
    c.visual_noise = m.value("visual_noise", c.visual_noise);
    c.latent_decay = m.value("latent_decay", c.latent_decay);
    c.latent_momentum = m.value("latent_momentum", c.latent_momentum);
    c.latent_step = m.value("latent_step", c.latent_step);
    c.latent_burn_in = m.value("latent_burn_in", c.latent_burn_in);
    if (m.contains("logfb")) {
      const json& l = m["logfb"];
      c.logfb.sample_rate = l.value("sample_rate", c.logfb.sample_rate);
      c.logfb.frame_length = l.value("frame_length", c.logfb.frame_length);
      c.logfb.hop = l.value("hop", c.logfb.hop);
      c.logfb.fft_size = l.value("fft_size", c.logfb.fft_size);
      c.logfb.num_filters = l.value("num_filters", c.logfb.num_filters);
      c.logfb.log_floor = l.value("log_floor", c.logfb.log_floor);
    }
    const auto files = m.at("files").get<std::vector<std::string>>();
    const auto snr = m.value("sequence_snr_db", std::vector<double>(files.size(), 0.0));
    if (files.size() != c.sequences || snr.size() != files.size()) throw FormatError("manifest sequence count disagrees with file list in " + dir.string());
    for (std::size_t i = 0; i < files.size(); ++i) {
      AVSequence seq = read_sequence_file(dir / files[i]);
      if (seq.clean.rows() != c.frames || seq.visual.cols() != c.visual_dim) {
        throw FormatError("sequence " + files[i] + " does not match manifest shape");
      }
      seq.snr_db = snr[i];
      ds.sequences.push_back(std::move(seq));
    }
    return ds;
  } catch (const json::exception& e) {
    throw FormatError("malformed manifest in " + dir.string() + ": " + e.what());
  }
}

}  // namespace ccgnn
