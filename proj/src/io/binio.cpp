#include "ccgnn/binio.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

namespace ccgnn::binio {
namespace {

template <class T>
void write_le(std::ostream& os, T v) {
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(buf.data(), buf.size());
}

template <class T>
T read_le(std::istream& is, std::string_view what) {
  std::array<unsigned char, sizeof(T)> buf{};
  is.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (is.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw FormatError("truncated " + std::string(what));
  }
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

// Guards against absurd headers before allocating.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

}  // namespace

void write_u16(std::ostream& os, std::uint16_t v) { write_le(os, v); }
void write_u32(std::ostream& os, std::uint32_t v) { write_le(os, v); }
void write_u64(std::ostream& os, std::uint64_t v) { write_le(os, v); }
void write_f64(std::ostream& os, double v) { write_le(os, std::bit_cast<std::uint64_t>(v)); }

std::uint16_t read_u16(std::istream& is, std::string_view what) { return read_le<std::uint16_t>(is, what); }
std::uint32_t read_u32(std::istream& is, std::string_view what) { return read_le<std::uint32_t>(is, what); }
std::uint64_t read_u64(std::istream& is, std::string_view what) { return read_le<std::uint64_t>(is, what); }
double read_f64(std::istream& is, std::string_view what) { return std::bit_cast<double>(read_le<std::uint64_t>(is, what)); }

void write_magic(std::ostream& os, std::string_view magic) { os.write(magic.data(), static_cast<std::streamsize>(magic.size())); }

void expect_magic(std::istream& is, std::string_view magic, std::string_view what) {
  std::string got(magic.size(), '\0');
  is.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (is.gcount() != static_cast<std::streamsize>(magic.size()) || got != magic) {
    throw FormatError("bad magic in " + std::string(what) + ": expected \"" + std::string(magic) + "\"");
  }
}

void write_named_array(std::ostream& os, std::string_view name, const Matrix& m) {
  if (name.size() > 0xFFFF) throw FormatError("array name too long: " + std::string(name.substr(0, 32)));
  write_u16(os, static_cast<std::uint16_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u64(os, m.rows());
  write_u64(os, m.cols());
  for (double v : m.data()) write_f64(os, v);
}

std::pair<std::string, Matrix> read_named_array(std::istream& is, std::string_view what) {
  const std::uint16_t len = read_u16(is, what);
  std::string name(len, '\0');
  is.read(name.data(), len);
  if (is.gcount() != len) throw FormatError("truncated " + std::string(what) + " (array name)");
  const std::uint64_t rows = read_u64(is, what);
  const std::uint64_t cols = read_u64(is, what);
  if (rows == 0 || cols == 0 || rows > kMaxElements || cols > kMaxElements || rows * cols > kMaxElements) {
    throw FormatError("invalid shape for array '" + name + "' in " + std::string(what));
  }
  std::vector<double> data(rows * cols);
  for (double& v : data) v = read_f64(is, what);
  return {std::move(name), Matrix(rows, cols, std::move(data))};
}

void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    body(os);
    os.flush();
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ccgnn::binio
