#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ucmar/rng.hpp"
#include "ucmar/sim/synthesis.hpp"

namespace ucmar {
namespace {

constexpr std::uint64_t kNoiseStream = 0x70686f746f6e7321ull;

std::string format_sample_id(std::uint64_t seed) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "pair-%016llx", static_cast<unsigned long long>(seed));
  return buf;
}

}  // namespace

PairedSample synthesize_pair(const Image& clean, const MetalMask& mask,
                             const ScanGeometry& geometry, std::uint64_t seed) {
  if (!clean.square()) throw std::invalid_argument("synthesize_pair: clean image must be square");
  if (mask.mask.rows() != clean.rows() || mask.mask.cols() != clean.cols())
    throw std::invalid_argument("synthesize_pair: clean and mask grid sizes differ");
  geometry.validate();

  const int grid = clean.rows();
  bool any_metal = false;
  Image implant = clean;
  for (std::size_t i = 0; i < implant.size(); ++i) {
    if (mask.mask[i]) {
      implant[i] = geometry.metal_attenuation;
      any_metal = true;
    }
  }

  Sinogram sino = forward_project(implant, geometry);

  // Metal path lengths per ray; skipped entirely for empty masks so the
  // no-corruption path touches no arithmetic.
  Sinogram metal_path{Raster<double>(sino.n_angles(), sino.n_detectors(), 0.0)};
  if (any_metal) {
    Image metal_img(grid, grid, 0.0);
    for (std::size_t i = 0; i < metal_img.size(); ++i) metal_img[i] = mask.mask[i] ? 1.0 : 0.0;
    metal_path = forward_project(metal_img, geometry);
  }

  const double scale = geometry.attenuation_scale;
  Rng rng(Rng::derive(seed, kNoiseStream));
  for (int a = 0; a < sino.n_angles(); ++a) {
    for (int d = 0; d < sino.n_detectors(); ++d) {
      const double p = sino.values(a, d);
      const double m = metal_path.values(a, d) * scale;
      const double hardening =
          m * (geometry.beam_hardening_c1 +
               m * (geometry.beam_hardening_c2 + m * geometry.beam_hardening_c3));
      double delta = hardening;
      if (geometry.poisson_noise) {
        const double optical = p * scale + hardening;
        const double mean = geometry.photon_count * std::exp(-optical);
        const double count =
            static_cast<double>(std::max<std::int64_t>(1, rng.poisson(mean)));
        delta = -std::log(count / geometry.photon_count) - p * scale;
      }
      sino.values(a, d) = p + delta / scale;
    }
  }

  PairedSample out;
  out.corrupted = fbp_reconstruct(sino, geometry, grid);
  out.clean = clean;
  out.mask = mask;
  out.sample_id = format_sample_id(seed);
  return out;
}

}  // namespace ucmar
