#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ucmar/sim/projection.hpp"

namespace ucmar {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Iterative radix-2 FFT with a precomputed twiddle table. Fixed operation
// order keeps reconstructions bit-reproducible run to run.
class Fft {
public:
  explicit Fft(int n) : n_(n) {
    if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("Fft: length must be a power of two");
    twiddle_.resize(n / 2);
    for (int j = 0; j < n / 2; ++j)
      twiddle_[j] = std::polar(1.0, -2.0 * kPi * j / n);
  }

  void forward(std::vector<std::complex<double>>& a) const { run(a, false); }
  void inverse(std::vector<std::complex<double>>& a) const {
    run(a, true);
    const double inv = 1.0 / n_;
    for (auto& v : a) v *= inv;
  }

private:
  void run(std::vector<std::complex<double>>& a, bool inv) const {
    const int n = n_;
    for (int i = 1, j = 0; i < n; ++i) {
      int bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
      const int stride = n / len;
      for (int i = 0; i < n; i += len) {
        for (int j = 0; j < len / 2; ++j) {
          std::complex<double> w = twiddle_[static_cast<std::size_t>(j) * stride];
          if (inv) w = std::conj(w);
          const std::complex<double> u = a[i + j];
          const std::complex<double> v = a[i + j + len / 2] * w;
          a[i + j] = u + v;
          a[i + j + len / 2] = u - v;
        }
      }
    }
  }

  int n_;
  std::vector<std::complex<double>> twiddle_;
};

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

Image fbp_reconstruct(const Sinogram& sinogram, const ScanGeometry& geometry, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("fbp_reconstruct: grid_size must be >= 2");
  const int n_ang = sinogram.n_angles();
  const int n_det = sinogram.n_detectors();
  if (n_ang != geometry.n_angles || n_det != geometry.detectors_for(grid_size))
    throw std::invalid_argument("fbp_reconstruct: sinogram dimensions do not match geometry");
  if (n_det < static_cast<int>(std::ceil(grid_size * std::sqrt(2.0))))
    throw std::invalid_argument("fbp_reconstruct: detector count too small for grid");

  const int padded = next_pow2(2 * n_det);
  const Fft fft(padded);

  // Band-limited ramp kernel (unit detector spacing), stored with wrap-around
  // so circular convolution equals linear convolution on the first n_det
  // samples: h[0] = 1/4, h[n] = -1/(pi^2 n^2) for odd n, 0 for even n.
  std::vector<std::complex<double>> kernel(padded, 0.0);
  kernel[0] = 0.25;
  for (int n = 1; n < n_det; ++n) {
    const double v = (n % 2 == 1) ? -1.0 / (kPi * kPi * n * n) : 0.0;
    kernel[n] = v;
    kernel[padded - n] = v;
  }
  fft.forward(kernel);

  Raster<double> filtered(n_ang, n_det, 0.0);
  std::vector<std::complex<double>> row(padded);
  for (int a = 0; a < n_ang; ++a) {
    std::fill(row.begin(), row.end(), std::complex<double>(0.0));
    for (int d = 0; d < n_det; ++d) row[d] = sinogram.values(a, d);
    fft.forward(row);
    for (int i = 0; i < padded; ++i) row[i] *= kernel[i];
    fft.inverse(row);
    for (int d = 0; d < n_det; ++d) filtered(a, d) = row[d].real();
  }

  // Backprojection: accumulate the filtered projections over angles.
  Image out(grid_size, grid_size, 0.0);
  const double center = (grid_size - 1.0) / 2.0;
  const double det_center = (n_det - 1.0) / 2.0;
  std::vector<double> cos_t(n_ang), sin_t(n_ang);
  for (int a = 0; a < n_ang; ++a) {
    const double theta = kPi * a / n_ang;
    cos_t[a] = std::cos(theta);
    sin_t[a] = std::sin(theta);
  }
  for (int y = 0; y < grid_size; ++y) {
    const double ry = y - center;
    for (int x = 0; x < grid_size; ++x) {
      const double rx = x - center;
      double acc = 0.0;
      for (int a = 0; a < n_ang; ++a) {
        const double u = rx * cos_t[a] + ry * sin_t[a] + det_center;
        const int d0 = static_cast<int>(std::floor(u));
        const double f = u - d0;
        double v = 0.0;
        if (d0 >= 0 && d0 < n_det) v += (1.0 - f) * filtered(a, d0);
        if (d0 + 1 >= 0 && d0 + 1 < n_det) v += f * filtered(a, d0 + 1);
        acc += v;
      }
      out(y, x) = acc * kPi / n_ang;
    }
  }

  // Clamp and per-image min-max rescale to [0, 1]; a constant result (e.g.
  // the all-zero sinogram) stays all-zero.
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) out[i] = 0.0;
    if (out[i] > 1.5) out[i] = 1.5;
  }
  const double lo = min_value(out);
  const double hi = max_value(out);
  if (hi > lo) {
    const double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - lo) * inv;
  } else {
    out.fill(0.0);
  }
  return out;
}

}  // namespace ucmar
