#pragma once

// Little-endian primitives and the named-array record shared by checkpoint
// and dataset files:
//   name length u16 | name bytes | rows u64 | cols u64 | rows*cols f64

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "ccgnn/matrix.hpp"

namespace ccgnn {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace binio {

void write_u16(std::ostream& os, std::uint16_t v);
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f64(std::ostream& os, double v);

std::uint16_t read_u16(std::istream& is, std::string_view what);
std::uint32_t read_u32(std::istream& is, std::string_view what);
std::uint64_t read_u64(std::istream& is, std::string_view what);
double read_f64(std::istream& is, std::string_view what);

void write_magic(std::ostream& os, std::string_view magic);
/// Throws FormatError naming the expected magic when it does not match.
void expect_magic(std::istream& is, std::string_view magic, std::string_view what);

void write_named_array(std::ostream& os, std::string_view name, const Matrix& m);
std::pair<std::string, Matrix> read_named_array(std::istream& is, std::string_view what);

/// Writes through a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);

}  // namespace binio
}  // namespace ccgnn
