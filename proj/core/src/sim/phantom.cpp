#include "ucmar/sim/phantom.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ucmar/rng.hpp"

namespace ucmar {
namespace {

struct Ellipse {
  double cx, cy;      // center, pixel coordinates
  double a, b;        // semi-axes
  double phi;         // rotation
  double exponent;    // 2 = ellipse, >2 = rounded-rectangle-ish superellipse
  double value;

  bool contains(double x, double y) const {
    const double dx = x - cx;
    const double dy = y - cy;
    const double u = (dx * std::cos(phi) + dy * std::sin(phi)) / a;
    const double v = (-dx * std::sin(phi) + dy * std::cos(phi)) / b;
    return std::pow(std::abs(u), exponent) + std::pow(std::abs(v), exponent) <= 1.0;
  }
};

void paint(Image& img, const Ellipse& e) {
  // Bounding box keeps rasterization cheap for small blobs.
  const double r = std::max(e.a, e.b);
  const int lo_y = std::max(0, static_cast<int>(std::floor(e.cy - r - 1)));
  const int hi_y = std::min(img.rows() - 1, static_cast<int>(std::ceil(e.cy + r + 1)));
  const int lo_x = std::max(0, static_cast<int>(std::floor(e.cx - r - 1)));
  const int hi_x = std::min(img.cols() - 1, static_cast<int>(std::ceil(e.cx + r + 1)));
  for (int y = lo_y; y <= hi_y; ++y)
    for (int x = lo_x; x <= hi_x; ++x)
      if (e.contains(x, y)) img(y, x) = e.value;
}

void paint_mask(MaskRaster& mask, const Ellipse& e) {
  const double r = std::max(e.a, e.b);
  const int lo_y = std::max(0, static_cast<int>(std::floor(e.cy - r - 1)));
  const int hi_y = std::min(mask.rows() - 1, static_cast<int>(std::ceil(e.cy + r + 1)));
  const int lo_x = std::max(0, static_cast<int>(std::floor(e.cx - r - 1)));
  const int hi_x = std::min(mask.cols() - 1, static_cast<int>(std::ceil(e.cx + r + 1)));
  for (int y = lo_y; y <= hi_y; ++y)
    for (int x = lo_x; x <= hi_x; ++x)
      if (e.contains(x, y)) mask(y, x) = 1;
}

}  // namespace

std::size_t MetalMask::area() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) n += mask[i] != 0;
  return n;
}

Image generate_phantom(std::uint64_t seed, int grid_size) {
  if (grid_size < 32) throw std::invalid_argument("generate_phantom: grid_size must be >= 32");

  Rng rng(seed);
  Image img(grid_size, grid_size, 0.0);
  const double g = grid_size;
  const double c = (g - 1.0) / 2.0;

  Ellipse body;
  body.cx = c + rng.uniform(-0.03, 0.03) * g;
  body.cy = c + rng.uniform(-0.03, 0.03) * g;
  body.a = rng.uniform(0.30, 0.42) * g;
  body.b = rng.uniform(0.30, 0.42) * g;
  body.phi = rng.uniform(0.0, 3.14159265358979323846);
  body.exponent = 2.0;
  body.value = rng.uniform(0.25, 0.40);
  paint(img, body);

  // 2-7 internal structures -> 3-8 ellipses total, each with attenuation at
  // least 0.15 away from the body so the image always has internal edges.
  const int internal = static_cast<int>(rng.uniform_int(2, 7));
  const double inner_r = 0.75 * std::min(body.a, body.b);
  for (int k = 0; k < internal; ++k) {
    Ellipse e;
    const double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const double rad = rng.uniform(0.0, 1.0) * inner_r;
    e.cx = body.cx + rad * std::cos(ang);
    e.cy = body.cy + rad * std::sin(ang);
    e.a = rng.uniform(0.05, 0.20) * g;
    e.b = rng.uniform(0.05, 0.20) * g;
    e.phi = rng.uniform(0.0, 3.14159265358979323846);
    e.exponent = 2.0;
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double offset = 0.15 + rng.uniform(0.0, 0.5);
    e.value = body.value + sign * offset;
    if (e.value < 0.05) e.value = body.value + offset;
    if (e.value > 1.0) e.value = 1.0;
    paint(img, e);
  }

  // Normalize so the maximum is exactly 1 (background stays 0).
  const double m = max_value(img);
  if (m > 0.0 && m != 1.0)
    for (std::size_t i = 0; i < img.size(); ++i) img[i] /= m;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (img[i] < 0.0) img[i] = 0.0;
    if (img[i] > 1.0) img[i] = 1.0;
  }
  return img;
}

MetalMask generate_metal_mask(std::uint64_t seed, int grid_size, int implant_count) {
  if (implant_count < 1 || implant_count > 4)
    throw std::invalid_argument("generate_metal_mask: implant_count must be in [1, 4]");
  if (grid_size < 32)
    throw std::invalid_argument("generate_metal_mask: grid_size must be >= 32");

  const double g = grid_size;
  const double total = g * g;
  const auto min_area = static_cast<std::size_t>(std::ceil(0.001 * total));
  const auto max_area = static_cast<std::size_t>(std::floor(0.10 * total));

  // Rejection loop: resample until the blobs stay disjoint (one 4-connected
  // component each) and the total area lands in bounds.
  for (int attempt = 0; attempt < 64; ++attempt) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(attempt)));
    MetalMask out;
    out.mask = MaskRaster(grid_size, grid_size, 0);
    out.implant_count = implant_count;

    const double c = (g - 1.0) / 2.0;
    for (int k = 0; k < implant_count; ++k) {
      Ellipse e;
      const double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      const double rad = rng.uniform(0.05, 0.30) * g;
      e.cx = c + rad * std::cos(ang);
      e.cy = c + rad * std::sin(ang);
      e.a = rng.uniform(0.030, 0.075) * g;
      e.b = rng.uniform(0.030, 0.075) * g;
      e.phi = rng.uniform(0.0, 3.14159265358979323846);
      e.exponent = rng.uniform() < 0.4 ? 4.0 : 2.0;
      e.value = 1.0;
      paint_mask(out.mask, e);
    }

    const std::size_t area = out.area();
    if (area < min_area || area > max_area) continue;
    if (count_components_4(out.mask) != implant_count) continue;
    return out;
  }
  throw std::runtime_error("generate_metal_mask: could not satisfy mask invariants");
}

int count_components_4(const MaskRaster& mask) {
  const int h = mask.rows(), w = mask.cols();
  std::vector<char> seen(static_cast<std::size_t>(h) * w, 0);
  std::vector<int> stack;
  int components = 0;
  for (int start = 0; start < h * w; ++start) {
    if (mask[start] == 0 || seen[start]) continue;
    ++components;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int y = p / w, x = p % w;
      const int ns[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
      for (const auto& n : ns) {
        if (n[0] < 0 || n[0] >= h || n[1] < 0 || n[1] >= w) continue;
        const int q = n[0] * w + n[1];
        if (mask[q] != 0 && !seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      }
    }
  }
  return components;
}

}  // namespace ucmar
