#pragma once

#include <cstdint>

#include "ucmar/raster.hpp"

namespace ucmar {

/// Boolean implant raster. Each implant is one 4-connected component; total
/// area stays between 0.1% and 10% of the image.
struct MetalMask {
  MaskRaster mask;
  int implant_count = 0;

  int grid_size() const { return mask.rows(); }
  std::size_t area() const;
};

/// Procedural CT-like phantom: a soft-tissue body ellipse with 2-7 internal
/// structures of distinct attenuation, normalized to [0,1] with max exactly 1.
/// Deterministic in the seed.
Image generate_phantom(std::uint64_t seed, int grid_size);

/// Procedural implant mask with the requested number of blobs (ellipses and
/// superellipses of varying size/orientation). Deterministic in the seed.
MetalMask generate_metal_mask(std::uint64_t seed, int grid_size, int implant_count);

/// 4-connected component count (used by the mask generator to guarantee the
/// implant count).
int count_components_4(const MaskRaster& mask);

}  // namespace ucmar
