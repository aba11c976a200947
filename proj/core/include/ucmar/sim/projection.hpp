#pragma once

#include "ucmar/raster.hpp"
#include "ucmar/sim/geometry.hpp"

namespace ucmar {

/// Parallel-beam sinogram: rows = projection angles (equally spaced in
/// [0, pi)), columns = detector bins with unit (1 pixel) spacing.
struct Sinogram {
  Raster<double> values;

  int n_angles() const { return values.rows(); }
  int n_detectors() const { return values.cols(); }
};

/// Discrete Radon transform: each entry is the line integral of the image
/// along the corresponding ray (bilinear sampling, midpoint rule with step
/// geometry.ray_step pixels). Linear in the image. Integrals are in
/// pixel-length units.
Sinogram forward_project(const Image& image, const ScanGeometry& geometry);

/// Ramp-filtered back-projection onto a grid_size^2 image. Projections are
/// zero-padded to the next power of two >= 2*detectors and filtered with the
/// band-limited ramp (Ram-Lak) kernel in the frequency domain. The result is
/// clamped to [0, 1.5] and min-max rescaled to [0, 1] per image (an all-zero
/// sinogram stays all-zero).
Image fbp_reconstruct(const Sinogram& sinogram, const ScanGeometry& geometry, int grid_size);

}  // namespace ucmar
