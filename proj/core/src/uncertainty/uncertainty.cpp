#include <cmath>
#include <stdexcept>

#include "ucmar/errors.hpp"
#include "ucmar/uncertainty/uncertainty.hpp"

namespace ucmar {

Image std_image(const std::vector<Image>& stack, StdDivisor divisor) {
  if (stack.size() < 2)
    throw std::invalid_argument("std_image: need at least 2 rasters");
  const Image& first = stack.front();
  for (const Image& img : stack) {
    if (!img.same_shape(first)) throw std::invalid_argument("std_image: raster shapes differ");
    if (!all_finite(img)) throw InvalidInputError("std_image: rasters must be finite");
  }

  // Welford streaming moments, pixelwise across the stack.
  const std::size_t n_px = first.size();
  std::vector<double> mean(n_px, 0.0), m2(n_px, 0.0);
  double count = 0.0;
  for (const Image& img : stack) {
    count += 1.0;
    for (std::size_t i = 0; i < n_px; ++i) {
      const double delta = img[i] - mean[i];
      mean[i] += delta / count;
      m2[i] += delta * (img[i] - mean[i]);
    }
  }
  const double denom =
      (divisor == StdDivisor::population) ? count : count - 1.0;
  Image out(first.rows(), first.cols());
  for (std::size_t i = 0; i < n_px; ++i) out[i] = std::sqrt(m2[i] / denom);
  return out;
}

UncertaintyMap compute_uncertainty(const std::vector<Image>& restorations,
                                   StdDivisor divisor) {
  UncertaintyMap map;
  map.values = std_image(restorations, divisor);
  const double lo = min_value(map.values);
  const double hi = max_value(map.values);
  if (hi > lo) {
    for (std::size_t i = 0; i < map.values.size(); ++i)
      map.values[i] = (map.values[i] - lo) / (hi - lo);
  } else {
    map.values.fill(0.0);
  }
  return map;
}

std::vector<Image> ensemble_infer(const CheckpointSet& checkpoints, const Image& image) {
  checkpoints.validate();
  std::vector<Image> out;
  out.reserve(checkpoints.members.size());
  for (const Checkpoint& cp : checkpoints.members)
    out.push_back(materialize(cp).restore(image));
  return out;
}

std::pair<double, double> uncertainty_profile(const UncertaintyMap& map,
                                              const MaskRaster& mask_hi,
                                              const MaskRaster& mask_lo) {
  const Image& u = map.values;
  if (mask_hi.rows() != u.rows() || mask_hi.cols() != u.cols() ||
      mask_lo.rows() != u.rows() || mask_lo.cols() != u.cols())
    throw std::invalid_argument("uncertainty_profile: mask shapes differ from the map");

  double sum_hi = 0.0, sum_lo = 0.0;
  std::size_t n_hi = 0, n_lo = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]))
      throw InvalidInputError("uncertainty_profile: map contains non-finite values");
    const bool hi = mask_hi[i] != 0;
    const bool lo = mask_lo[i] != 0;
    if (hi && lo)
      throw std::invalid_argument("uncertainty_profile: masks overlap");
    if (hi) {
      sum_hi += u[i];
      ++n_hi;
    } else if (lo) {
      sum_lo += u[i];
      ++n_lo;
    }
  }
  if (n_hi == 0 || n_lo == 0)
    throw std::invalid_argument("uncertainty_profile: masks must be nonempty");
  return {sum_hi / static_cast<double>(n_hi), sum_lo / static_cast<double>(n_lo)};
}

}  // namespace ucmar
