#include <cmath>
#include <stdexcept>

#include "ucmar/errors.hpp"
#include "ucmar/loss/loss.hpp"

namespace ucmar {
namespace {

void check_shapes(const Image& pred, const Image& gt, const Image* u,
                  const MaskRaster* metal_mask) {
  if (!pred.same_shape(gt)) throw std::invalid_argument("loss: pred and gt shapes differ");
  if (u && !u->same_shape(pred))
    throw std::invalid_argument("loss: uncertainty shape differs from pred");
  if (metal_mask && (metal_mask->rows() != pred.rows() || metal_mask->cols() != pred.cols()))
    throw std::invalid_argument("loss: metal mask shape differs from pred");
  if (u) {
    for (std::size_t i = 0; i < u->size(); ++i) {
      const double v = (*u)[i];
      if (!(v >= 0.0 && v <= 1.0))  // also catches NaN
        throw InvalidInputError("loss: uncertainty values must lie in [0, 1]");
    }
  }
}

LossValue weighted_loss(const Image& pred, const Image& gt, const Image* u,
                        const MaskRaster* metal_mask) {
  check_shapes(pred, gt, u, metal_mask);
  double sum = 0.0;
  int counted = 0;
  bool all_zero = true;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (metal_mask && (*metal_mask)[i]) continue;
    double r = pred[i] - gt[i];
    if (u) r *= 1.0 + (*u)[i];
    if (r != 0.0) all_zero = false;
    sum += r * r;
    ++counted;
  }
  if (counted == 0) throw std::invalid_argument("loss: mask excludes every pixel");
  LossValue out;
  out.pixel_count = counted;
  out.value = std::sqrt(sum / counted);
  out.zero_residual = all_zero;
  return out;
}

}  // namespace

LossValue rmse_loss(const Image& pred, const Image& gt, const MaskRaster* metal_mask) {
  return weighted_loss(pred, gt, nullptr, metal_mask);
}

LossValue uc_loss(const Image& pred, const Image& gt, const Image& u,
                  const MaskRaster* metal_mask) {
  return weighted_loss(pred, gt, &u, metal_mask);
}

LossGradient loss_gradient(LossKind kind, const Image& pred, const Image& gt, const Image* u,
                           const MaskRaster* metal_mask) {
  if (kind == LossKind::uc && !u)
    throw std::invalid_argument("loss_gradient: uc kind requires an uncertainty raster");
  const Image* weights = (kind == LossKind::uc) ? u : nullptr;
  const LossValue loss = weighted_loss(pred, gt, weights, metal_mask);

  LossGradient out;
  out.grad = Image(pred.rows(), pred.cols(), 0.0);
  if (loss.value == 0.0) {
    out.degenerate = true;
    return out;
  }
  const double denom = static_cast<double>(loss.pixel_count) * loss.value;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (metal_mask && (*metal_mask)[i]) continue;
    const double w = weights ? 1.0 + (*weights)[i] : 1.0;
    out.grad[i] = (pred[i] - gt[i]) * w * w / denom;
  }
  return out;
}

}  // namespace ucmar
