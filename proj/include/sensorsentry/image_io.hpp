// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file image_io.hpp
/// @brief PNG / PPM / PGM reading and writing for images, depth and masks.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sensorsentry/raster.hpp"

namespace sensorsentry {

/// Reads an 8-bit RGB image from PNG (any colour type, converted) or binary
/// PPM (P6). The format is detected from the file signature.
ImageBuffer read_image(const std::filesystem::path& path);
void write_png(const ImageBuffer& img, const std::filesystem::path& path);
void write_ppm(const ImageBuffer& img, const std::filesystem::path& path);
/// Writes PNG unless the extension is .ppm.
void write_image(const ImageBuffer& img, const std::filesystem::path& path);

/// Depth from a grayscale PNG (16-bit: v/65535, 8-bit: v/255) or a PGM
/// (ASCII P2 or binary P5: v/maxval).
DepthMap read_depth(const std::filesystem::path& path);
/// 16-bit grayscale PNG, round(d * 65535).
void write_depth_png(const DepthMap& depth, const std::filesystem::path& path);

/// Masks are stored as 8-bit grayscale PNG, value = round(m * 255).
void write_mask_png(const SpatialMask& mask, const std::filesystem::path& path);
SpatialMask read_mask_png(const std::filesystem::path& path);

/// Encodes to an in-memory PNG; used for hashing and tests.
std::vector<std::uint8_t> encode_png(const ImageBuffer& img);

}  // namespace sensorsentry
