#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "timelimits/core/environment.hpp"
#include "timelimits/core/stats.hpp"
#include "timelimits/core/time_limit.hpp"
#include "timelimits/policy_grad/ppo.hpp"

namespace timelimits {

struct PpoTrainConfig {
  PpoConfig ppo;
  std::vector<std::size_t> hidden{64, 64};
  std::size_t total_steps = 100'000;
  std::size_t eval_every = 10'000;  // 0 evaluates only at the end
  std::size_t eval_episodes = 20;
  bool greedy_eval = false;

  void validate() const {
    ppo.validate();
    if (total_steps == 0) throw InvalidInput("total_steps must be positive");
    if (eval_episodes == 0) throw InvalidInput("eval_episodes must be positive");
  }
};

struct PpoEvalPoint {
  std::size_t step = 0;
  MeanStderr episode_return;
  MeanStderr episode_length;
  double success_rate = 0.0;  // fraction of episodes ending with positive return
  PpoLoss loss;               // diagnostics of the most recent update
};

struct PpoTrainResult {
  MlpShape shape;
  Eigen::VectorXd parameters;
  std::vector<PpoEvalPoint> curve;
  std::size_t updates = 0;
};

/// Fills `batch` with `horizon` environment steps, resuming from `obs`.
/// Every timeout step and the last step of the batch (unless it ended the
/// episode environmentally) carry the value of the observation reached.
template <Environment E>
void collect_rollout(TimeLimit<E>& env, PpoAgent& agent, Observation& obs, std::size_t horizon,
                     TrajectoryBatch& batch) {
  batch.steps.clear();
  batch.steps.reserve(horizon);
  for (std::size_t i = 0; i < horizon; ++i) {
    const auto d = agent.act(obs);
    StepResult r = env.step(d.action);
    TrajectoryStep step{obs, d.action, r.reward, d.log_prob, d.value, r.termination, std::nullopt};
    if (r.timeout() || (!r.terminated() && i + 1 == horizon))
      step.bootstrap_value = agent.value(r.observation);
    batch.steps.push_back(std::move(step));
    obs = r.terminated() ? env.reset() : std::move(r.observation);
  }
}

struct PolicyEvaluation {
  MeanStderr episode_return;
  MeanStderr episode_length;
  double success_rate = 0.0;
};

/// Undiscounted return of `episodes` full episodes. Stochastic evaluation
/// samples from the policy; greedy evaluation takes the argmax.
template <Environment E>
PolicyEvaluation evaluate_policy(TimeLimit<E>& env, PpoAgent& agent, std::size_t episodes,
                                 bool greedy) {
  std::vector<double> returns, lengths;
  std::size_t successes = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    Observation obs = env.reset();
    double total = 0.0;
    std::size_t length = 0;
    for (;;) {
      const ActionIndex a = greedy ? agent.greedy(obs) : agent.act(obs).action;
      StepResult r = env.step(a);
      total += r.reward;
      ++length;
      if (r.terminated()) break;
      obs = std::move(r.observation);
    }
    returns.push_back(total);
    lengths.push_back(static_cast<double>(length));
    if (total > 0.0) ++successes;
  }
  return {mean_stderr(returns), mean_stderr(lengths),
          static_cast<double>(successes) / static_cast<double>(episodes)};
}

/// Trains one PPO agent. `eval_env` is used only for evaluation; the agent's
/// sampling stream is shared, so evaluation is part of the seeded trajectory.
template <Environment E>
PpoTrainResult train_ppo(TimeLimit<E> train_env, TimeLimit<E> eval_env, const PpoTrainConfig& cfg,
                         std::uint64_t seed) {
  cfg.validate();
  if (train_env.observation_dim() != eval_env.observation_dim())
    throw InvalidInput("training and evaluation observations differ in dimension");
  MlpShape shape{train_env.observation_dim(), cfg.hidden, train_env.num_actions()};
  PpoAgent agent(shape, cfg.ppo, seed);
  Rng eval_stream(seed, 3);

  PpoTrainResult result;
  result.shape = shape;
  Observation obs = train_env.reset();
  TrajectoryBatch batch;
  PpoLoss last_loss;
  std::size_t steps = 0;
  std::size_t next_eval = cfg.eval_every ? cfg.eval_every : cfg.total_steps;

  auto evaluate = [&]() {
    PpoAgent evaluator(shape, cfg.ppo, eval_stream());
    evaluator.set_parameters(agent.parameters());
    const auto ev = evaluate_policy(eval_env, evaluator, cfg.eval_episodes, cfg.greedy_eval);
    result.curve.push_back({steps, ev.episode_return, ev.episode_length, ev.success_rate, last_loss});
  };

  while (steps < cfg.total_steps) {
    const std::size_t horizon = std::min(cfg.ppo.horizon, cfg.total_steps - steps);
    if (cfg.ppo.anneal_learning_rate)
      agent.set_learning_rate(cfg.ppo.learning_rate *
                              (1.0 - static_cast<double>(steps) / static_cast<double>(cfg.total_steps)));
    collect_rollout(train_env, agent, obs, horizon, batch);
    steps += horizon;
    last_loss = agent.learn(batch).mean_loss;
    ++result.updates;
    while (steps >= next_eval && next_eval <= cfg.total_steps) {
      evaluate();
      next_eval += cfg.eval_every ? cfg.eval_every : cfg.total_steps;
    }
  }
  if (result.curve.empty() || result.curve.back().step != steps) evaluate();
  result.parameters = agent.parameters();
  return result;
}

}  // namespace timelimits
