#include "ucmar/sim/projection.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ucmar {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Bilinear sample at pixel-center coordinates (ux along columns, uy along
// rows); everything outside the grid contributes zero.
inline double bilinear(const Image& im, double ux, double uy) {
  const int x0 = static_cast<int>(std::floor(ux));
  const int y0 = static_cast<int>(std::floor(uy));
  const double fx = ux - x0;
  const double fy = uy - y0;
  const int w = im.cols(), h = im.rows();
  double acc = 0.0;
  if (y0 >= 0 && y0 < h) {
    if (x0 >= 0 && x0 < w) acc += (1.0 - fx) * (1.0 - fy) * im(y0, x0);
    if (x0 + 1 >= 0 && x0 + 1 < w) acc += fx * (1.0 - fy) * im(y0, x0 + 1);
  }
  if (y0 + 1 >= 0 && y0 + 1 < h) {
    if (x0 >= 0 && x0 < w) acc += (1.0 - fx) * fy * im(y0 + 1, x0);
    if (x0 + 1 >= 0 && x0 + 1 < w) acc += fx * fy * im(y0 + 1, x0 + 1);
  }
  return acc;
}

}  // namespace

Sinogram forward_project(const Image& image, const ScanGeometry& geometry) {
  if (!image.square()) throw std::invalid_argument("forward_project: image must be square");
  geometry.validate();
  const int grid = image.rows();
  const int n_det = geometry.detectors_for(grid);
  const int min_det = static_cast<int>(std::ceil(grid * std::sqrt(2.0)));
  if (n_det < min_det)
    throw std::invalid_argument("forward_project: n_detectors must be >= ceil(grid*sqrt(2))");

  const int n_ang = geometry.n_angles;
  const double step = geometry.ray_step;
  const double center = (grid - 1.0) / 2.0;
  const double det_center = (n_det - 1.0) / 2.0;
  const double half_span = grid * std::sqrt(2.0) / 2.0 + 1.0;
  const int n_samples = static_cast<int>(std::ceil(2.0 * half_span / step));

  Sinogram sino;
  sino.values = Raster<double>(n_ang, n_det, 0.0);

  for (int a = 0; a < n_ang; ++a) {
    const double theta = kPi * a / n_ang;
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    for (int d = 0; d < n_det; ++d) {
      const double s = d - det_center;
      double acc = 0.0;
      for (int k = 0; k < n_samples; ++k) {
        const double t = -half_span + (k + 0.5) * step;  // midpoint rule
        const double x = s * ct - t * st;
        const double y = s * st + t * ct;
        acc += bilinear(image, x + center, y + center);
      }
      sino.values(a, d) = acc * step;
    }
  }
  return sino;
}

}  // namespace ucmar
