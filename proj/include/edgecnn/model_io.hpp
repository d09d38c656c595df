//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "edgecnn/model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace edgecnn
{

// Model file layout (all integers little-endian):
//
//   offset 0   "CNNM"
//   offset 4   format version, u16
//   offset 6   header length in bytes, u32
//   offset 10  UTF-8 JSON header
//   ...        weight blob: per layer, kernel then bias, float32 LE
//
// Kernel order is kh -> kw -> cin -> cout for conv2d, kh -> kw -> c for depthwise and n -> m for dense.

inline constexpr char kModelMagic[4]          = { 'C', 'N', 'N', 'M' };
inline constexpr std::uint16_t kModelVersion  = 1;
inline constexpr std::size_t kModelPrefixSize = 10;

enum class WeightDtype
{
    Float32,
    Uint8,
};

struct SizeEstimate
{
    std::int64_t params         = 0;
    std::int64_t file_bytes_f32 = 0;
    std::int64_t file_bytes_u8  = 0;
};

/// JSON header text for `spec` (identical for every weight state of the same graph).
std::string encode_header(const ModelSpec& spec, WeightDtype dtype = WeightDtype::Float32);

/// Exact stored size of `spec` as a float32 model file, and the same file with 8-bit weights.
SizeEstimate estimate_size(const ModelSpec& spec);

std::vector<std::uint8_t> serialize(const ModelSpec& spec);
ModelSpec deserialize(std::span<const std::uint8_t> bytes);

void save_model(const ModelSpec& spec, const std::filesystem::path& path);
ModelSpec load_model(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}    // namespace edgecnn
