#pragma once

// Checkpoint file: "CCGN" | version u32 | array count u32 | named arrays.

#include <cstdint>
#include <filesystem>

#include "ccgnn/encoders.hpp"
#include "ccgnn/parameters.hpp"

namespace ccgnn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ParameterSet& params, const std::filesystem::path& path);
ParameterSet load_checkpoint(const std::filesystem::path& path);

/// Recovers model kind and layer widths from parameter names and shapes.
EncoderConfig infer_encoder_config(const ParameterSet& params);

}  // namespace ccgnn
