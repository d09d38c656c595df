//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "edgecnn/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace edgecnn
{

// Decoders return h x w x 3 tensors with values 0..255. Grayscale is replicated to three
// channels and alpha is dropped.

Tensor decode_ppm(std::span<const std::uint8_t> bytes);
Tensor decode_png(std::span<const std::uint8_t> bytes);
/// Dispatches on the file signature ("P6" or the PNG magic).
Tensor decode_image(const std::filesystem::path& path);

/// Bilinear resize with half-pixel centers: source coordinate = (dst + 0.5) * scale - 0.5,
/// clamped to the image.
Tensor resize_bilinear(const Tensor& image, int out_height, int out_width);

/// decode -> resize -> scale by 1/255.
Tensor load_normalized_image(const std::filesystem::path& path, int height, int width);

// Encoders take 0..255 values (rounded and clamped). Single-channel input writes a grayscale
// PNG; PPM output always has three channels.

std::vector<std::uint8_t> encode_png(const Tensor& image);
std::vector<std::uint8_t> encode_ppm(const Tensor& image);
/// Format chosen from the extension (.png, otherwise PPM).
void write_image(const std::filesystem::path& path, const Tensor& image);

}    // namespace edgecnn
