#pragma once

#include <cstdint>
#include <string>

#include "ucmar/raster.hpp"
#include "ucmar/sim/geometry.hpp"
#include "ucmar/sim/phantom.hpp"
#include "ucmar/sim/projection.hpp"

namespace ucmar {

/// One training/evaluation unit: a metal-corrupted input, its artifact-free
/// target, and the implant mask that produced the corruption.
struct PairedSample {
  Image corrupted;
  Image clean;
  MetalMask mask;
  std::string sample_id;
};

/// Builds the corrupted/clean pair for a phantom and implant mask.
///
/// Pipeline: paint the implants into the clean image at
/// geometry.metal_attenuation, forward-project, then perturb each ray in
/// optical-depth units (pixel-length integrals scaled by
/// geometry.attenuation_scale): add the beam-hardening polynomial
/// c1*m + c2*m^2 + c3*m^3 of the scaled metal path length m, and, when
/// enabled, resample the transmitted photon count from a Poisson law with
/// mean photon_count * exp(-p) and invert via -log(count / photon_count)
/// with counts clamped to >= 1. The perturbed sinogram is reconstructed with
/// fbp_reconstruct to give the corrupted image.
///
/// The perturbation is applied as a delta on top of the unscaled sinogram, so
/// with an empty mask and noise disabled the result is bit-identical to
/// fbp_reconstruct(forward_project(clean)).
///
/// Deterministic in seed. Throws std::invalid_argument when clean and mask
/// disagree on grid size or the geometry is invalid.
PairedSample synthesize_pair(const Image& clean, const MetalMask& mask,
                             const ScanGeometry& geometry, std::uint64_t seed);

}  // namespace ucmar
