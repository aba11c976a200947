#pragma once

#include "ucmar/raster.hpp"

namespace ucmar {

enum class LossKind { rmse, uc };

struct LossValue {
  double value = 0.0;
  int pixel_count = 0;        // M: pixels entering the mean
  bool zero_residual = false; // prediction matched the target exactly
};

struct LossGradient {
  Image grad;              // d(loss)/d(prediction), zero at masked pixels
  bool degenerate = false; // loss was 0: gradient defined as the zero raster
};

/// Root-mean-square error sqrt((1/M) * sum (pred - gt)^2). With a metal mask,
/// masked pixels are excluded and M counts the rest. Throws
/// std::invalid_argument on shape mismatch or when masking leaves no pixels.
LossValue rmse_loss(const Image& pred, const Image& gt, const MaskRaster* metal_mask = nullptr);

/// Uncertainty-weighted variant sqrt((1/M) * sum ((pred - gt) * (1 + u))^2).
/// u must lie in [0, 1] and be finite (InvalidInputError otherwise). With
/// u == 0 everywhere this equals rmse_loss exactly; u == 1 doubles it.
LossValue uc_loss(const Image& pred, const Image& gt, const Image& u,
                  const MaskRaster* metal_mask = nullptr);

/// Analytic gradient: d(loss)/d(pred[m]) = (pred-gt)[m] * (1+u[m])^2 / (M*L),
/// with u treated as 0 for the rmse kind. When L == 0 the gradient is the
/// zero raster and `degenerate` is set (the subgradient convention; trainers
/// treat such steps as no-ops). u may be null only for the rmse kind.
LossGradient loss_gradient(LossKind kind, const Image& pred, const Image& gt,
                           const Image* u = nullptr, const MaskRaster* metal_mask = nullptr);

}  // namespace ucmar
