#pragma once

#include <cmath>
#include <stdexcept>

namespace ucmar {

/// Parallel-beam scan parameters plus the corruption physics used when
/// synthesizing metal-affected measurements.
struct ScanGeometry {
  int n_angles = 180;      // equally spaced in [0, pi)
  int n_detectors = 0;     // 0 = derive from the grid (ceil(grid*sqrt(2)) + 1)

  // Beam-hardening polynomial in the metal path length (optical-depth units):
  // extra attenuation = c1*m + c2*m^2 + c3*m^3.
  double beam_hardening_c1 = 0.6;
  double beam_hardening_c2 = 0.06;
  double beam_hardening_c3 = 0.0;

  double photon_count = 1e5;   // mean unattenuated transmitted count
  bool poisson_noise = true;   // false disables photon noise entirely

  // Pixel value painted into the implant region before projection. Well above
  // tissue attenuation (tissue is normalized to [0,1]).
  double metal_attenuation = 4.0;

  // Converts pixel-length line integrals to optical depth for the photon
  // model; keeps typical body rays at a transmitted count where noise is
  // mild and metal-trace rays photon-starved.
  double attenuation_scale = 0.1;

  double ray_step = 0.25;  // sampling step along rays, in pixels (<= 0.5)

  int detectors_for(int grid_size) const {
    if (n_detectors > 0) return n_detectors;
    return static_cast<int>(std::ceil(grid_size * std::sqrt(2.0))) + 1;
  }

  void validate() const {
    if (n_angles < 2) throw std::invalid_argument("ScanGeometry: n_angles must be >= 2");
    if (!std::isfinite(beam_hardening_c1) || !std::isfinite(beam_hardening_c2) ||
        !std::isfinite(beam_hardening_c3))
      throw std::invalid_argument("ScanGeometry: beam-hardening coefficients must be finite");
    if (photon_count <= 0.0)
      throw std::invalid_argument("ScanGeometry: photon_count must be > 0");
    if (metal_attenuation <= 0.0)
      throw std::invalid_argument("ScanGeometry: metal_attenuation must be > 0");
    if (attenuation_scale <= 0.0)
      throw std::invalid_argument("ScanGeometry: attenuation_scale must be > 0");
    if (ray_step <= 0.0 || ray_step > 0.5)
      throw std::invalid_argument("ScanGeometry: ray_step must be in (0, 0.5]");
  }
};

}  // namespace ucmar
