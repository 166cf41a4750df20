#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <vector>

#include "timelimits/core/errors.hpp"
#include "timelimits/core/random.hpp"
#include "timelimits/policy_grad/adam.hpp"
#include "timelimits/policy_grad/gae.hpp"
#include "timelimits/policy_grad/mlp.hpp"
#include "timelimits/policy_grad/trajectory.hpp"

namespace timelimits {

struct PpoConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  bool peb = false;
  double clip = 0.2;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  std::size_t epochs = 4;
  std::size_t minibatch = 64;
  double learning_rate = 3e-4;
  bool anneal_learning_rate = true;  // linear decay to 0 over the training budget
  std::size_t horizon = 512;    // environment steps per batch
  double max_grad_norm = 0.5;   // 0 disables clipping

  void validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in [0, 1]");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("lambda must lie in [0, 1]");
    if (!(clip > 0.0 && clip < 1.0)) throw InvalidInput("clip must lie in (0, 1)");
    if (!(entropy_coef >= 0.0) || !(value_coef >= 0.0))
      throw InvalidInput("loss coefficients must be non-negative");
    if (epochs == 0 || minibatch == 0 || horizon == 0)
      throw InvalidInput("epochs, minibatch and horizon must be positive");
    if (!(learning_rate > 0.0)) throw InvalidInput("learning rate must be positive");
    if (!(max_grad_norm >= 0.0)) throw InvalidInput("max_grad_norm must be non-negative");
  }
};

inline GaeResult gae_advantages(const TrajectoryBatch& batch, const PpoConfig& cfg) {
  return gae_advantages(batch, cfg.gamma, cfg.lambda, cfg.peb);
}

struct PpoMinibatch {
  Eigen::MatrixXd observations;  // (input, batch)
  std::vector<ActionIndex> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> targets;
};

struct PpoLoss {
  double total = 0.0;
  double policy = 0.0;   // negated clipped surrogate
  double value = 0.0;    // 0.5 * mean squared error
  double entropy = 0.0;  // mean policy entropy
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

/// Loss minimised by PPO on one minibatch:
///   -mean(min(rho A, clip(rho, 1-eps, 1+eps) A)) + c_v 0.5 mean((v - R)^2) - c_e mean(H)
/// together with its exact gradient with respect to the flat parameters.
inline std::pair<PpoLoss, Eigen::VectorXd> ppo_loss_and_gradient(const Mlp& net,
                                                                 const Eigen::VectorXd& params,
                                                                 const PpoMinibatch& mb,
                                                                 const PpoConfig& cfg) {
  const auto act = net.forward(params, mb.observations);
  const Eigen::MatrixXd logp = log_softmax(act.logits);
  const Eigen::Index batch = mb.observations.cols();
  const Eigen::Index actions = act.logits.rows();
  const double inv = 1.0 / static_cast<double>(batch);

  Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(actions, batch);
  Eigen::RowVectorXd dvalues(batch);
  PpoLoss loss;
  for (Eigen::Index j = 0; j < batch; ++j) {
    const auto a = static_cast<Eigen::Index>(mb.actions[j]);
    const double adv = mb.advantages[j];
    const double log_ratio = logp(a, j) - mb.old_log_probs[j];
    const double ratio = std::exp(log_ratio);
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
    const double unclipped_term = ratio * adv;
    const double clipped_term = clipped * adv;
    loss.policy -= std::min(unclipped_term, clipped_term) * inv;
    loss.clip_fraction += (std::abs(ratio - 1.0) > cfg.clip ? 1.0 : 0.0) * inv;
    loss.approx_kl += 0.5 * log_ratio * log_ratio * inv;

    // The min picks the unclipped branch unless the ratio has left the trust
    // region in the direction the advantage rewards.
    const bool flat = (adv > 0.0 && ratio > 1.0 + cfg.clip) || (adv < 0.0 && ratio < 1.0 - cfg.clip);
    const double dlogp = flat ? 0.0 : -ratio * adv * inv;

    const Eigen::VectorXd p = logp.col(j).array().exp();
    const double entropy = -(p.array() * logp.col(j).array()).sum();
    loss.entropy += entropy * inv;

    // d logp_a / dz = onehot(a) - p ;  dH / dz = -p (logp + H)
    dlogits.col(j) = -dlogp * p;
    dlogits(a, j) += dlogp;
    dlogits.col(j) += cfg.entropy_coef * inv *
                      (p.array() * (logp.col(j).array() + entropy)).matrix();

    const double err = act.values(j) - mb.targets[j];
    loss.value += 0.5 * err * err * inv;
    dvalues(j) = cfg.value_coef * err * inv;
  }
  loss.total = loss.policy + cfg.value_coef * loss.value - cfg.entropy_coef * loss.entropy;
  return {loss, net.backward(params, act, dlogits, dvalues)};
}

struct PpoDiagnostics {
  PpoLoss mean_loss;  // averaged over minibatch steps
  std::size_t minibatch_steps = 0;
};

namespace detail {

inline std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  return idx;
}

inline std::string dump(const PpoLoss& l, double grad_norm) {
  std::ostringstream os;
  os << "total=" << l.total << " policy=" << l.policy << " value=" << l.value
     << " entropy=" << l.entropy << " clip_fraction=" << l.clip_fraction
     << " approx_kl=" << l.approx_kl << " grad_norm=" << grad_norm;
  return os.str();
}

}  // namespace detail

/// `cfg.epochs` passes of Adam steps over shuffled minibatches. `advantages`
/// should already be normalised.
inline PpoDiagnostics ppo_update(const Mlp& net, Eigen::VectorXd& params, Adam& optimizer,
                                 const TrajectoryBatch& batch,
                                 const std::vector<double>& advantages,
                                 const std::vector<double>& targets, const PpoConfig& cfg,
                                 Rng& rng) {
  const std::size_t n = batch.size();
  if (advantages.size() != n || targets.size() != n)
    throw InvalidBatch("advantages/targets do not match the batch");
  const std::size_t dim = net.shape().input;
  PpoDiagnostics diag;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = detail::permutation(n, rng);
    for (std::size_t start = 0; start < n; start += cfg.minibatch) {
      const std::size_t size = std::min(cfg.minibatch, n - start);
      PpoMinibatch mb;
      mb.observations.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(size));
      for (std::size_t k = 0; k < size; ++k) {
        const std::size_t i = order[start + k];
        const auto& step = batch.steps[i];
        if (step.observation.size() != dim) throw InvalidBatch("observation dimension mismatch");
        mb.observations.col(static_cast<Eigen::Index>(k)) =
            Eigen::Map<const Eigen::VectorXd>(step.observation.data(), static_cast<Eigen::Index>(dim));
        mb.actions.push_back(step.action);
        mb.old_log_probs.push_back(step.log_prob);
        mb.advantages.push_back(advantages[i]);
        mb.targets.push_back(targets[i]);
      }
      auto [loss, grad] = ppo_loss_and_gradient(net, params, mb, cfg);
      const double norm = grad.norm();
      if (!std::isfinite(loss.total) || !std::isfinite(norm))
        throw NumericalFailure("non-finite PPO loss or gradient: " + detail::dump(loss, norm));
      if (cfg.max_grad_norm > 0.0 && norm > cfg.max_grad_norm) grad *= cfg.max_grad_norm / norm;
      optimizer.step(params, grad);

      auto& m = diag.mean_loss;
      m.total += loss.total;
      m.policy += loss.policy;
      m.value += loss.value;
      m.entropy += loss.entropy;
      m.clip_fraction += loss.clip_fraction;
      m.approx_kl += loss.approx_kl;
      ++diag.minibatch_steps;
    }
  }
  if (diag.minibatch_steps) {
    const double k = 1.0 / static_cast<double>(diag.minibatch_steps);
    auto& m = diag.mean_loss;
    m.total *= k, m.policy *= k, m.value *= k, m.entropy *= k, m.clip_fraction *= k,
        m.approx_kl *= k;
  }
  return diag;
}

/// Stochastic softmax policy with a value baseline, trained by PPO.
class PpoAgent {
 public:
  struct Decision {
    ActionIndex action = 0;
    double log_prob = 0.0;
    double value = 0.0;
  };

  PpoAgent(MlpShape shape, PpoConfig cfg, std::uint64_t seed)
      : net_(std::move(shape)), cfg_(cfg), rng_(seed, 0x990),
        optimizer_(net_.num_parameters(), cfg.learning_rate) {
    cfg_.validate();
    Rng init = rng_.split(7);
    params_ = net_.initial_parameters(init);
  }

  /// Samples an action from the current policy.
  Decision act(const Observation& obs) {
    const auto out = net_.forward(params_, column(obs));
    const Eigen::VectorXd logp = log_softmax(out.logits).col(0);
    double u = rng_.uniform();
    ActionIndex a = 0;
    for (; a + 1 < static_cast<ActionIndex>(logp.size()); ++a) {
      const double p = std::exp(logp(static_cast<Eigen::Index>(a)));
      if (u < p) break;
      u -= p;
    }
    return {a, logp(static_cast<Eigen::Index>(a)), out.values(0)};
  }

  [[nodiscard]] std::vector<double> probabilities(const Observation& obs) const {
    const Eigen::VectorXd logp = log_softmax(net_.forward(params_, column(obs)).logits).col(0);
    std::vector<double> p(static_cast<std::size_t>(logp.size()));
    for (Eigen::Index i = 0; i < logp.size(); ++i) p[static_cast<std::size_t>(i)] = std::exp(logp(i));
    return p;
  }

  [[nodiscard]] ActionIndex greedy(const Observation& obs) const {
    Eigen::Index best = 0;
    net_.forward(params_, column(obs)).logits.col(0).maxCoeff(&best);
    return static_cast<ActionIndex>(best);
  }

  [[nodiscard]] double value(const Observation& obs) const {
    return net_.forward(params_, column(obs)).values(0);
  }

  /// Advantage estimation, per-batch normalisation and the PPO update.
  PpoDiagnostics learn(const TrajectoryBatch& batch) {
    GaeResult gae = gae_advantages(batch, cfg_);
    normalize_advantages(gae.advantages);
    return ppo_update(net_, params_, optimizer_, batch, gae.advantages, gae.targets, cfg_, rng_);
  }

  /// Sets the step size used by subsequent updates.
  void set_learning_rate(double lr) { optimizer_.set_learning_rate(lr); }

  [[nodiscard]] const Mlp& network() const { return net_; }
  [[nodiscard]] const PpoConfig& config() const { return cfg_; }
  [[nodiscard]] const Eigen::VectorXd& parameters() const { return params_; }
  void set_parameters(Eigen::VectorXd params) {
    if (static_cast<std::size_t>(params.size()) != net_.num_parameters())
      throw InvalidInput("parameter count does not match the network");
    params_ = std::move(params);
  }

 private:
  [[nodiscard]] Eigen::MatrixXd column(const Observation& obs) const {
    return Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
  }

  Mlp net_;
  PpoConfig cfg_;
  Rng rng_;
  Adam optimizer_;
  Eigen::VectorXd params_;
};

}  // namespace timelimits
