#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace timelimits {

/// Adam with bias correction.
class Adam {
 public:
  explicit Adam(std::size_t size, double learning_rate = 3e-4, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-5)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon),
        m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
        v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))) {}

  /// Applies one descent step to `params` given the loss gradient.
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

  void set_learning_rate(double lr) { lr_ = lr; }
  [[nodiscard]] double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  Eigen::VectorXd m_, v_;
  std::size_t t_ = 0;
};

}  // namespace timelimits
