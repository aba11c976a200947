#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ucmar {

/// Dense row-major 2-D array. Carries CT images (double), metal masks
/// (uint8) and sinograms (double, rows = angles).
template <typename T>
class Raster {
public:
  Raster() = default;
  Raster(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("Raster: dimensions must be positive");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  bool same_shape(const Raster& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const Raster& a, const Raster& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using Image = Raster<double>;          // square attenuation raster in [0,1]
using MaskRaster = Raster<std::uint8_t>;

template <typename T>
T min_value(const Raster<T>& r) {
  T m = r[0];
  for (std::size_t i = 1; i < r.size(); ++i)
    if (r[i] < m) m = r[i];
  return m;
}

template <typename T>
T max_value(const Raster<T>& r) {
  T m = r[0];
  for (std::size_t i = 1; i < r.size(); ++i)
    if (r[i] > m) m = r[i];
  return m;
}

inline double mean_value(const Image& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r[i];
  return s / static_cast<double>(r.size());
}

inline bool all_finite(const Image& r) {
  for (std::size_t i = 0; i < r.size(); ++i)
    if (!std::isfinite(r[i])) return false;
  return true;
}

}  // namespace ucmar
