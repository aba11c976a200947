#pragma once

#include <filesystem>

#include "ucmar/raster.hpp"

namespace ucmar {

// On-disk raster format: 16-byte header (magic "UCMR", u32 rows, u32 cols,
// u32 dtype tag), then the row-major little-endian payload. Images are stored
// as float32 (tag 1), masks as uint8 (tag 2).
inline constexpr std::uint32_t kRasterTagF32 = 1;
inline constexpr std::uint32_t kRasterTagU8 = 2;

void write_raster_f32(const std::filesystem::path& path, const Image& image);
Image read_raster_f32(const std::filesystem::path& path);

void write_raster_u8(const std::filesystem::path& path, const MaskRaster& mask);
MaskRaster read_raster_u8(const std::filesystem::path& path);

/// Rounds every value through float32, i.e. what a write/read round trip
/// produces. Training consumes rasters loaded from disk, so callers use this
/// to reason about quantization.
Image quantize_f32(const Image& image);

}  // namespace ucmar
