#pragma once

// On-disk dataset: a directory with manifest.json and one binary file per
// sequence ("AVDS" | version u32 | arrays "clean", "noisy", "visual").

#include <cstdint>
#include <filesystem>

#include "ccgnn/features.hpp"

namespace ccgnn {

inline constexpr std::uint32_t kDatasetVersion = 1;

void write_dataset(const AVDataset& ds, const std::filesystem::path& dir);
AVDataset read_dataset(const std::filesystem::path& dir);

void write_sequence_file(const AVSequence& seq, const std::filesystem::path& path);
AVSequence read_sequence_file(const std::filesystem::path& path);

}  // namespace ccgnn
