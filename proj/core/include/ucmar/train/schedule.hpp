#pragma once

#include <cmath>
#include <stdexcept>

namespace ucmar {

/// Cosine-annealed learning rate with wraparound:
/// lr(e) = min + 0.5*(base - min)*(1 + cos(pi * (e mod period) / period)).
inline double cosine_lr(int epoch, double base_lr, double min_lr, int period) {
  if (epoch < 0) throw std::invalid_argument("cosine_lr: epoch must be >= 0");
  if (period < 1) throw std::invalid_argument("cosine_lr: period must be >= 1");
  if (!(min_lr > 0.0 && min_lr < base_lr))
    throw std::invalid_argument("cosine_lr: need 0 < min_lr < base_lr");
  const double phase = 3.14159265358979323846 * (epoch % period) / period;
  return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + std::cos(phase));
}

}  // namespace ucmar
