#pragma once

#include <cstdint>
#include <vector>

#include "timelimits/tabular/q_learning.hpp"

namespace timelimits {

struct MonteCarloConfig {
  bool time_aware = false;
  LearningSchedule schedule;
  double gamma = 0.99;
  std::size_t episodes = 1;
  std::uint64_t seed = 0;
  double initial_value = 0.0;

  void validate() const {
    schedule.validate();
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in [0, 1]");
    if (episodes == 0) throw InvalidInput("need at least one episode");
  }
};

/// Every-visit Monte Carlo control: after each episode, every visited pair
/// moves toward the complete return observed from that visit. Nothing is
/// bootstrapped, so a timeout simply ends the return.
template <FiniteEnvironment E>
TabularRunResult mc_control_run(TimeLimit<E>& env, const MonteCarloConfig& cfg) {
  cfg.validate();
  const TimeoutMode mode = cfg.time_aware ? TimeoutMode::TimeAware : TimeoutMode::Standard;
  Rng rng(cfg.seed, 0x3c3c);
  TabularRunResult result{make_table(env, mode, cfg.initial_value), {}, {}};
  QTable& q = result.table;

  struct Visit {
    std::size_t slice;
    StateIndex state;
    ActionIndex action;
    double reward;
  };
  std::vector<Visit> visits;
  std::vector<ActionIndex> late_snapshot;
  const std::size_t late_episode = cfg.episodes - cfg.episodes / 10;

  for (std::size_t episode = 0; episode < cfg.episodes; ++episode) {
    if (episode == late_episode) late_snapshot = detail::greedy_snapshot(q);
    env.reset();
    visits.clear();
    EpisodeStats stats;
    while (true) {
      const std::size_t slice = slice_for(mode, env.remaining());
      const StateIndex s = env.state_index();
      const ActionIndex a = detail::epsilon_greedy(q, slice, s, cfg.schedule.epsilon, rng);
      const StepResult step = env.step(a);
      visits.push_back({slice, s, a, step.reward});
      stats.total_reward += step.reward;
      ++stats.length;
      ++result.metadata.steps;
      if (step.terminated()) {
        stats.termination = step.termination;
        break;
      }
    }
    double ret = 0.0;
    for (auto it = visits.rbegin(); it != visits.rend(); ++it) {
      ret = it->reward + cfg.gamma * ret;
      const std::uint64_t n = ++q.visits(it->slice, it->state, it->action);
      double& value = q.value(it->slice, it->state, it->action);
      value += cfg.schedule.alpha(n) * (ret - value);
      ++result.metadata.updates;
    }
    result.curve.push_back(stats);
  }
  if (!late_snapshot.empty())
    result.metadata.late_policy_changes =
        detail::count_changes(late_snapshot, detail::greedy_snapshot(q));
  return result;
}

}  // namespace timelimits
