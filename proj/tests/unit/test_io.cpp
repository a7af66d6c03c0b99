#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ccgnn/binio.hpp"
#include "ccgnn/checkpoint.hpp"
#include "ccgnn/dataset_io.hpp"
#include "doctest.h"
#include "gen.hpp"

using namespace ccgnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ccgnn_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

void dump(const fs::path& p, const std::string& bytes) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os << bytes;
}

}  // namespace

TEST_CASE("little-endian primitives") {
  std::stringstream ss;
  binio::write_u32(ss, 0x01020304u);
  const std::string s = ss.str();
  CHECK(static_cast<unsigned char>(s[0]) == 0x04);
  CHECK(binio::read_u32(ss, "x") == 0x01020304u);
  CHECK_THROWS_AS(binio::read_u64(ss, "x"), FormatError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  const fs::path dir = scratch("ckpt");
  gen::for_cases(101, 10, [&](Rng& rng, int c) {
    CAPTURE(c);
    ParameterSet ps;
    const std::size_t n = gen::size_in(rng, 0, 6);
    for (std::size_t i = 0; i < n; ++i) {
      ps.add("p" + std::to_string(i), gen::lumpy_matrix(rng, gen::size_in(rng, 1, 5), gen::size_in(rng, 1, 5)));
    }
    save_checkpoint(ps, dir / "a.ccgn");
    CHECK(load_checkpoint(dir / "a.ccgn") == ps);
    save_checkpoint(ps, dir / "b.ccgn");
    CHECK(slurp(dir / "a.ccgn") == slurp(dir / "b.ccgn"));
  });
}

TEST_CASE("checkpoint corruption is reported, not loaded") {
  const fs::path dir = scratch("corrupt");
  Rng rng(102);
  ParameterSet ps;
  ps.add("w", gen::matrix(rng, 3, 3));
  save_checkpoint(ps, dir / "good.ccgn");
  const std::string good = slurp(dir / "good.ccgn");

  SUBCASE("bad magic") {
    std::string b = good;
    b[0] = 'X';
    dump(dir / "bad.ccgn", b);
    CHECK_THROWS_WITH_AS(load_checkpoint(dir / "bad.ccgn"), doctest::Contains("CCGN"), FormatError);
  }
  SUBCASE("future version") {
    std::string b = good;
    b[4] = 9;
    dump(dir / "bad.ccgn", b);
    CHECK_THROWS_WITH_AS(load_checkpoint(dir / "bad.ccgn"), doctest::Contains("version 9"), FormatError);
  }
  SUBCASE("truncated") {
    for (std::size_t cut : {std::size_t{2}, std::size_t{10}, good.size() - 1}) {
      dump(dir / "bad.ccgn", good.substr(0, cut));
      CHECK_THROWS_AS(load_checkpoint(dir / "bad.ccgn"), FormatError);
    }
  }
  SUBCASE("trailing bytes") {
    dump(dir / "bad.ccgn", good + "x");
    CHECK_THROWS_WITH_AS(load_checkpoint(dir / "bad.ccgn"), doctest::Contains("trailing"), FormatError);
  }
  SUBCASE("missing file") { CHECK_THROWS(load_checkpoint(dir / "nope.ccgn")); }
}

TEST_CASE("encoder config is recovered from a checkpoint") {
  for (ModelKind m : {ModelKind::Cortical, ModelKind::CcaGnn}) {
    EncoderConfig cfg;
    cfg.model = m;
    cfg.widths = {7, 3};
    cfg.audio_dim = 22;
    cfg.visual_dim = 11;
    Rng rng(103);
    const EncoderConfig back = infer_encoder_config(init_encoder(cfg, rng));
    CHECK(back.model == m);
    CHECK(back.widths == cfg.widths);
    CHECK(back.audio_dim == 22);
    CHECK(back.visual_dim == 11);
  }
  ParameterSet junk;
  junk.add("head.weight", Matrix(2, 2));
  CHECK_THROWS_AS(infer_encoder_config(junk), FormatError);
}

TEST_CASE("dataset round trip") {
  const fs::path dir = scratch("dataset");
  SynthConfig cfg;
  cfg.sequences = 3;
  cfg.frames = 6;
  const AVDataset ds = synth_av_generate(cfg, 17);
  write_dataset(ds, dir);
  CHECK(fs::exists(dir / "manifest.json"));
  const AVDataset back = read_dataset(dir);
  CHECK(back.seed == 17);
  CHECK(back.config.frames == 6);
  CHECK(back.config.latent_decay == cfg.latent_decay);
  REQUIRE(back.sequences.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(back.sequences[i] == ds.sequences[i]);

  // Rewriting the same dataset gives the same bytes.
  const std::string manifest = slurp(dir / "manifest.json");
  write_dataset(back, dir);
  CHECK(slurp(dir / "manifest.json") == manifest);
}

TEST_CASE("dataset errors") {
  const fs::path dir = scratch("dataset_bad");
  CHECK_THROWS(read_dataset(dir));
  SynthConfig cfg;
  cfg.sequences = 2;
  cfg.frames = 4;
  write_dataset(synth_av_generate(cfg, 1), dir);
  fs::remove(dir / "seq_00001.avds");
  CHECK_THROWS(read_dataset(dir));
  dump(dir / "manifest.json", "{ not json");
  CHECK_THROWS_AS(read_dataset(dir), FormatError);
}
