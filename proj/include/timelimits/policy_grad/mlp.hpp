#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "timelimits/core/errors.hpp"
#include "timelimits/core/random.hpp"

namespace timelimits {

struct MlpShape {
  std::size_t input = 1;
  std::vector<std::size_t> hidden{64, 64};
  std::size_t actions = 2;

  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

/// Tanh trunk with a linear policy head (action logits) and a linear value
/// head. The object only describes the architecture; parameters live in a flat
/// vector laid out as W, b for each trunk layer, then the policy head, then
/// the value head. Matrices are column-major with shape (out, in).
class Mlp {
 public:
  struct Activations {
    Eigen::MatrixXd input;               // (in, batch)
    std::vector<Eigen::MatrixXd> trunk;  // post-tanh, one per hidden layer
    Eigen::MatrixXd logits;              // (actions, batch)
    Eigen::RowVectorXd values;           // (1, batch)
  };

  explicit Mlp(MlpShape shape) : shape_(std::move(shape)) {
    if (shape_.input == 0 || shape_.actions == 0) throw InvalidInput("empty network shape");
    std::size_t in = shape_.input;
    for (std::size_t width : shape_.hidden) {
      add_layer(width, in);
      in = width;
    }
    add_layer(shape_.actions, in);
    add_layer(1, in);
  }

  [[nodiscard]] const MlpShape& shape() const { return shape_; }
  [[nodiscard]] std::size_t num_parameters() const { return size_; }

  /// Orthogonal initialisation: gain sqrt(2) in the trunk, 0.01 on the policy
  /// head (near-uniform initial policy), 1 on the value head; zero biases.
  [[nodiscard]] Eigen::VectorXd initial_parameters(Rng& rng) const {
    Eigen::VectorXd params = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size_));
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const Layer& L = layers_[l];
      const double gain = l + 2 < layers_.size() ? std::sqrt(2.0)
                          : l + 2 == layers_.size() ? 0.01
                                                    : 1.0;
      weights(params, L) = gain * orthogonal(L.out, L.in, rng);
    }
    return params;
  }

  [[nodiscard]] Activations forward(const Eigen::VectorXd& params,
                                    const Eigen::MatrixXd& inputs) const {
    check(params, inputs);
    Activations act;
    act.input = inputs;
    const Eigen::MatrixXd* x = &act.input;
    const std::size_t depth = shape_.hidden.size();
    act.trunk.reserve(depth);
    for (std::size_t l = 0; l < depth; ++l) {
      Eigen::MatrixXd pre = weights(params, layers_[l]) * *x;
      pre.colwise() += bias(params, layers_[l]);
      act.trunk.push_back(pre.array().tanh().matrix());
      x = &act.trunk.back();
    }
    act.logits = weights(params, layers_[depth]) * *x;
    act.logits.colwise() += bias(params, layers_[depth]);
    Eigen::MatrixXd v = weights(params, layers_[depth + 1]) * *x;
    v.colwise() += bias(params, layers_[depth + 1]);
    act.values = v.row(0);
    return act;
  }

  /// Gradient of a scalar loss given its derivatives with respect to the
  /// logits and values of a forward pass.
  [[nodiscard]] Eigen::VectorXd backward(const Eigen::VectorXd& params, const Activations& act,
                                         const Eigen::MatrixXd& dlogits,
                                         const Eigen::RowVectorXd& dvalues) const {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size_));
    const std::size_t depth = shape_.hidden.size();
    const Eigen::MatrixXd& top = depth ? act.trunk.back() : act.input;
    const Layer& pi = layers_[depth];
    const Layer& vf = layers_[depth + 1];

    weights(grad, pi) = dlogits * top.transpose();
    bias(grad, pi) = dlogits.rowwise().sum();
    weights(grad, vf) = dvalues * top.transpose();
    bias(grad, vf)(0) = dvalues.sum();

    Eigen::MatrixXd dx = weights(params, pi).transpose() * dlogits +
                         weights(params, vf).transpose() * dvalues;
    for (std::size_t l = depth; l-- > 0;) {
      const Eigen::MatrixXd& h = act.trunk[l];
      const Eigen::MatrixXd dpre = (dx.array() * (1.0 - h.array().square())).matrix();
      const Eigen::MatrixXd& below = l ? act.trunk[l - 1] : act.input;
      weights(grad, layers_[l]) = dpre * below.transpose();
      bias(grad, layers_[l]) = dpre.rowwise().sum();
      if (l) dx = weights(params, layers_[l]).transpose() * dpre;
    }
    return grad;
  }

 private:
  struct Layer {
    std::size_t out, in, offset;
  };

  void add_layer(std::size_t out, std::size_t in) {
    layers_.push_back({out, in, size_});
    size_ += out * in + out;
  }

  static Eigen::Map<Eigen::MatrixXd> weights(Eigen::VectorXd& p, const Layer& L) {
    return {p.data() + L.offset, static_cast<Eigen::Index>(L.out), static_cast<Eigen::Index>(L.in)};
  }
  static Eigen::Map<const Eigen::MatrixXd> weights(const Eigen::VectorXd& p, const Layer& L) {
    return {p.data() + L.offset, static_cast<Eigen::Index>(L.out), static_cast<Eigen::Index>(L.in)};
  }
  static Eigen::Map<Eigen::VectorXd> bias(Eigen::VectorXd& p, const Layer& L) {
    return {p.data() + L.offset + L.out * L.in, static_cast<Eigen::Index>(L.out)};
  }
  static Eigen::Map<const Eigen::VectorXd> bias(const Eigen::VectorXd& p, const Layer& L) {
    return {p.data() + L.offset + L.out * L.in, static_cast<Eigen::Index>(L.out)};
  }

  static Eigen::MatrixXd orthogonal(std::size_t rows, std::size_t cols, Rng& rng) {
    const std::size_t big = std::max(rows, cols), small = std::min(rows, cols);
    Eigen::MatrixXd g(static_cast<Eigen::Index>(big), static_cast<Eigen::Index>(small));
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
    // sign fix so the distribution is uniform over orthogonal matrices
    const auto r = qr.matrixQR();
    for (Eigen::Index j = 0; j < q.cols(); ++j)
      if (r(j, j) < 0) q.col(j) *= -1.0;
    if (rows < cols) return q.transpose();
    return q;
  }

  void check(const Eigen::VectorXd& params, const Eigen::MatrixXd& inputs) const {
    if (static_cast<std::size_t>(params.size()) != size_)
      throw InvalidInput("parameter vector does not match the network shape");
    if (static_cast<std::size_t>(inputs.rows()) != shape_.input)
      throw InvalidInput("input dimension does not match the network shape");
  }

  MlpShape shape_;
  std::vector<Layer> layers_;
  std::size_t size_ = 0;
};

/// Column-wise log-softmax.
inline Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double m = logits.col(j).maxCoeff();
    const double lse = m + std::log((logits.col(j).array() - m).exp().sum());
    out.col(j) = logits.col(j).array() - lse;
  }
  return out;
}

}  // namespace timelimits
