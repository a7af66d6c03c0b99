#include "ccgnn/checkpoint.hpp"

#include <fstream>
#include <limits>

#include "ccgnn/binio.hpp"

namespace ccgnn {

void save_checkpoint(const ParameterSet& params, const std::filesystem::path& path) {
  if (params.size() > std::numeric_limits<std::uint32_t>::max()) throw FormatError("too many arrays for a checkpoint");
  binio::atomic_write(path, [&](std::ostream& os) {
    binio::write_magic(os, "CCGN");
    binio::write_u32(os, kCheckpointVersion);
    binio::write_u32(os, static_cast<std::uint32_t>(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) binio::write_named_array(os, params.name(i), params.value(i));
  });
}

ParameterSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path.string());
  const std::string what = "checkpoint " + path.string();
  binio::expect_magic(is, "CCGN", what);
  const std::uint32_t version = binio::read_u32(is, what);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + " in " + path.string() +
                      " (this build reads version " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint32_t count = binio::read_u32(is, what);
  ParameterSet out;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto [name, value] = binio::read_named_array(is, what);
    out.add(std::move(name), std::move(value));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after " + what);
  return out;
}

EncoderConfig infer_encoder_config(const ParameterSet& params) {
  EncoderConfig cfg;
  if (params.contains(cortical_param(0, "w_a"))) {
    cfg.model = ModelKind::Cortical;
    cfg.widths.clear();
    for (std::size_t b = 0; params.contains(cortical_param(b, "w_a")); ++b) {
      cfg.widths.push_back(params[cortical_param(b, "w_a")].cols());
    }
    cfg.audio_dim = params[cortical_param(0, "gcn_a.weight")].rows();
    cfg.visual_dim = params[cortical_param(0, "gcn_v.weight")].rows();
    return cfg;
  }
  if (params.contains(ccagnn_param("audio", 0, "weight"))) {
    cfg.model = ModelKind::CcaGnn;
    cfg.widths.clear();
    for (std::size_t l = 0; params.contains(ccagnn_param("audio", l, "weight")); ++l) {
      cfg.widths.push_back(params[ccagnn_param("audio", l, "weight")].cols());
    }
    cfg.audio_dim = params[ccagnn_param("audio", 0, "weight")].rows();
    cfg.visual_dim = params[ccagnn_param("visual", 0, "weight")].rows();
    return cfg;
  }
  throw FormatError("checkpoint does not hold a known encoder");
}

}  // namespace ccgnn
