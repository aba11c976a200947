// Independent reference implementations used to cross-check the library.
// Everything here is deliberately written in the most direct (naive) way
// possible, with no code shared with core/, so that agreement between the
// two is meaningful evidence rather than a tautology.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "ucmar/raster.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Per-pixel standard deviation over a stack of rasters, classic two-pass form
// (mean first, then squared deviations).  divisor_n selects the population
// (divide by N) versus sample (divide by N-1) convention.
inline ucmar::Raster<double> two_pass_std(const std::vector<ucmar::Image>& stack,
                                          bool divisor_n) {
  const std::size_t n = stack.size();
  if (n < 2) throw std::invalid_argument("two_pass_std: need at least two rasters");
  const int rows = stack[0].rows(), cols = stack[0].cols();
  ucmar::Raster<double> out(rows, cols, 0.0);
  const double denom = divisor_n ? static_cast<double>(n) : static_cast<double>(n - 1);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      double mean = 0.0;
      for (const auto& img : stack) mean += img(y, x);
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (const auto& img : stack) {
        const double d = img(y, x) - mean;
        ss += d * d;
      }
      out(y, x) = std::sqrt(ss / denom);
    }
  }
  return out;
}

// Min-max normalization matching the documented contract: degenerate (flat)
// input maps to all zeros.
inline ucmar::Image minmax_normalize(const ucmar::Raster<double>& in) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int y = 0; y < in.rows(); ++y)
    for (int x = 0; x < in.cols(); ++x) {
      lo = std::min(lo, in(y, x));
      hi = std::max(hi, in(y, x));
    }
  ucmar::Image out(in.rows(), in.cols(), 0.0);
  if (hi > lo)
    for (int y = 0; y < in.rows(); ++y)
      for (int x = 0; x < in.cols(); ++x) out(y, x) = (in(y, x) - lo) / (hi - lo);
  return out;
}

// ---------------------------------------------------------------------------
// PSNR straight from the definition: 10*log10(range^2 / MSE) over unmasked
// pixels.  Identical inputs yield +infinity.
inline double psnr(const ucmar::Image& pred, const ucmar::Image& gt, double range,
                   const ucmar::MaskRaster* skip = nullptr) {
  double se = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < pred.rows(); ++y)
    for (int x = 0; x < pred.cols(); ++x) {
      if (skip && (*skip)(y, x)) continue;
      const double d = pred(y, x) - gt(y, x);
      se += d * d;
      ++n;
    }
  if (n == 0) throw std::invalid_argument("psnr oracle: mask excludes everything");
  const double mse = se / static_cast<double>(n);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(range * range / mse);
}

// ---------------------------------------------------------------------------
// SSIM straight from the definition: for every fully-interior window center,
// Gaussian-weighted means/variances/covariance computed by direct 2-D loops
// (no separable shortcut), then the usual (2*mx*my+c1)(2*cov+c2) /
// ((mx^2+my^2+c1)(vx+vy+c2)) ratio, averaged over counted windows.  Windows
// whose center pixel is masked are skipped.
inline double ssim(const ucmar::Image& a, const ucmar::Image& b, double range,
                   int window = 11, double sigma = 1.5, double k1 = 0.01,
                   double k2 = 0.03, const ucmar::MaskRaster* skip = nullptr) {
  const int half = window / 2;
  std::vector<double> w(static_cast<std::size_t>(window) * window);
  double wsum = 0.0;
  for (int i = 0; i < window; ++i)
    for (int j = 0; j < window; ++j) {
      const double dy = i - half, dx = j - half;
      const double g = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
      w[static_cast<std::size_t>(i) * window + j] = g;
      wsum += g;
    }
  for (double& v : w) v /= wsum;

  const double c1 = (k1 * range) * (k1 * range);
  const double c2 = (k2 * range) * (k2 * range);
  double total = 0.0;
  std::size_t counted = 0;
  for (int cy = half; cy < a.rows() - half; ++cy) {
    for (int cx = half; cx < a.cols() - half; ++cx) {
      if (skip && (*skip)(cy, cx)) continue;
      double mx = 0.0, my = 0.0;
      for (int i = 0; i < window; ++i)
        for (int j = 0; j < window; ++j) {
          const double wij = w[static_cast<std::size_t>(i) * window + j];
          mx += wij * a(cy + i - half, cx + j - half);
          my += wij * b(cy + i - half, cx + j - half);
        }
      double vx = 0.0, vy = 0.0, cov = 0.0;
      for (int i = 0; i < window; ++i)
        for (int j = 0; j < window; ++j) {
          const double wij = w[static_cast<std::size_t>(i) * window + j];
          const double da = a(cy + i - half, cx + j - half) - mx;
          const double db = b(cy + i - half, cx + j - half) - my;
          vx += wij * da * da;
          vy += wij * db * db;
          cov += wij * da * db;
        }
      total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++counted;
    }
  }
  if (counted == 0) throw std::invalid_argument("ssim oracle: nothing counted");
  return total / static_cast<double>(counted);
}

// ---------------------------------------------------------------------------
// 4-connected component count by breadth-first flood fill.
inline int count_components(const ucmar::MaskRaster& mask) {
  const int rows = mask.rows(), cols = mask.cols();
  std::vector<char> seen(static_cast<std::size_t>(rows) * cols, 0);
  auto at = [&](int y, int x) -> char& { return seen[static_cast<std::size_t>(y) * cols + x]; };
  int components = 0;
  std::vector<std::pair<int, int>> queue;
  for (int sy = 0; sy < rows; ++sy) {
    for (int sx = 0; sx < cols; ++sx) {
      if (!mask(sy, sx) || at(sy, sx)) continue;
      ++components;
      queue.assign(1, {sy, sx});
      at(sy, sx) = 1;
      while (!queue.empty()) {
        auto [y, x] = queue.back();
        queue.pop_back();
        const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int ny = y + dy[k], nx = x + dx[k];
          if (ny < 0 || ny >= rows || nx < 0 || nx >= cols) continue;
          if (!mask(ny, nx) || at(ny, nx)) continue;
          at(ny, nx) = 1;
          queue.push_back({ny, nx});
        }
      }
    }
  }
  return components;
}

// ---------------------------------------------------------------------------
// Anti-aliased disk: per-pixel coverage estimated with a 4x4 subsample grid.
// Used for geometric checks where the expected line integral through a disk
// of radius r is the chord length 2*sqrt(r^2 - off^2).
inline ucmar::Image disk_image(int grid, double cy, double cx, double r, double value = 1.0) {
  ucmar::Image img(grid, grid, 0.0);
  for (int y = 0; y < grid; ++y)
    for (int x = 0; x < grid; ++x) {
      int inside = 0;
      for (int sy = 0; sy < 4; ++sy)
        for (int sx = 0; sx < 4; ++sx) {
          const double py = y + (sy + 0.5) / 4.0, px = x + (sx + 0.5) / 4.0;
          const double dy = py - cy, dx = px - cx;
          if (dy * dy + dx * dx <= r * r) ++inside;
        }
      img(y, x) = value * inside / 16.0;
    }
  return img;
}

// ---------------------------------------------------------------------------
// Uniform random raster in [lo, hi) from a seed, using the standard library
// generator (distinct from the library's own RNG on purpose).
inline ucmar::Image random_image(std::uint64_t seed, int rows, int cols, double lo = 0.0,
                                 double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  ucmar::Image img(rows, cols, 0.0);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) img(y, x) = dist(gen);
  return img;
}

// Largest relative difference, guarding tiny denominators.
inline double rel_err(double got, double want, double floor_ = 1e-12) {
  return std::abs(got - want) / std::max(std::abs(want), floor_);
}

}  // namespace oracle
