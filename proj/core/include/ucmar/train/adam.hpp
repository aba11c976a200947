#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ucmar {

/// Adam with bias correction. Moment state and the update arithmetic run in
/// double regardless of the parameter type, so float-parameter training uses
/// the same update rule the 64-bit gradient checks see.
class Adam {
 public:
  Adam(std::size_t n, double beta1, double beta2, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
      throw std::invalid_argument("Adam: betas must lie in [0, 1)");
  }

  template <typename S>
  void step(std::vector<S>& params, const std::vector<S>& grad, double lr) {
    if (params.size() != m_.size() || grad.size() != m_.size())
      throw std::invalid_argument("Adam: parameter/gradient size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, t_);
    const double c2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = static_cast<double>(grad[i]);
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
      const double update = lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
      params[i] = static_cast<S>(static_cast<double>(params[i]) - update);
    }
  }

  long step_count() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace ucmar
