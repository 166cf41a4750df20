#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "timelimits/core/environment.hpp"
#include "timelimits/core/random.hpp"
#include "timelimits/core/time_limit.hpp"
#include "timelimits/tabular/q_table.hpp"
#include "timelimits/tabular/replay_buffer.hpp"
#include "timelimits/tabular/schedule.hpp"
#include "timelimits/tabular/td_target.hpp"

namespace timelimits {

struct QLearningConfig {
  TimeoutMode mode = TimeoutMode::Standard;
  LearningSchedule schedule;
  double gamma = 0.99;
  std::size_t episodes = 0;   // 0: no episode budget
  std::size_t max_steps = 0;  // 0: no step budget
  std::uint64_t seed = 0;
  std::size_t buffer_capacity = 0;  // 0: online updates
  std::size_t updates_per_step = 1;
  double initial_value = 0.0;

  void validate() const {
    schedule.validate();
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in [0, 1]");
    if (episodes == 0 && max_steps == 0) throw InvalidInput("need an episode or step budget");
  }
};

struct EpisodeStats {
  double total_reward = 0.0;  // undiscounted
  std::size_t length = 0;
  std::optional<TerminationKind> termination;

  friend bool operator==(const EpisodeStats&, const EpisodeStats&) = default;
};

struct TabularRunMetadata {
  std::size_t steps = 0;
  std::size_t updates = 0;
  std::size_t skipped_updates = 0;  // replay updates attempted on an empty buffer
  /// Greedy actions that changed over the final tenth of the budget.
  std::size_t late_policy_changes = 0;
};

struct TabularRunResult {
  QTable table;
  std::vector<EpisodeStats> curve;
  TabularRunMetadata metadata;
};

/// Called as observer(step_count, table) after every environment step.
using TableObserver = std::function<void(std::size_t, const QTable&)>;

template <FiniteEnvironment E>
QTable make_table(const TimeLimit<E>& env, TimeoutMode mode, double initial = 0.0) {
  const E& base = env.base();
  std::vector<std::size_t> actions(base.num_states());
  for (StateIndex s = 0; s < actions.size(); ++s) actions[s] = base.num_actions_in(s);
  return QTable(std::move(actions), mode == TimeoutMode::TimeAware ? env.horizon() : 1, initial);
}

namespace detail {

inline void apply_td_update(QTable& q, TimeoutMode mode, const LearningSchedule& schedule,
                            double gamma, const Transition& t) {
  const double target = td_target(mode, t, q, gamma);
  const std::size_t slice = slice_for(mode, t.remaining + 1);
  const std::uint64_t n = ++q.visits(slice, t.state, t.action);
  double& value = q.value(slice, t.state, t.action);
  value += schedule.alpha(n) * (target - value);
}

inline std::vector<ActionIndex> greedy_snapshot(const QTable& q) {
  std::vector<ActionIndex> out;
  out.reserve(q.slices() * q.num_states());
  for (std::size_t k = 0; k < q.slices(); ++k)
    for (StateIndex s = 0; s < q.num_states(); ++s) out.push_back(q.greedy(k, s));
  return out;
}

inline std::size_t count_changes(const std::vector<ActionIndex>& a,
                                 const std::vector<ActionIndex>& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) n += a[i] != b[i];
  return n;
}

inline ActionIndex epsilon_greedy(const QTable& q, std::size_t slice, StateIndex s,
                                  double epsilon, Rng& rng) {
  if (epsilon >= 1.0 || rng.bernoulli(epsilon)) return rng.below(q.num_actions(s));
  return q.greedy(slice, s, rng);
}

}  // namespace detail

/// Tabular Q-learning on a time-limited finite environment. Without a buffer
/// every step updates on the transition just observed; with one, the
/// transition is stored and `updates_per_step` uniformly sampled transitions
/// are replayed.
template <FiniteEnvironment E>
TabularRunResult q_learning_run(TimeLimit<E>& env, const QLearningConfig& cfg,
                                const TableObserver& observer = {}) {
  cfg.validate();
  Rng rng(cfg.seed, 0xa9e7);
  Rng replay_rng = rng.split(1);
  std::optional<ReplayBuffer<Transition>> buffer;
  if (cfg.buffer_capacity > 0) buffer.emplace(cfg.buffer_capacity);

  TabularRunResult result{make_table(env, cfg.mode, cfg.initial_value), {}, {}};
  QTable& q = result.table;
  auto& meta = result.metadata;

  const std::size_t late_episode = cfg.episodes - cfg.episodes / 10;
  const std::size_t late_step = cfg.max_steps - cfg.max_steps / 10;
  std::optional<std::vector<ActionIndex>> late_snapshot;
  auto maybe_snapshot = [&](std::size_t episode) {
    if (late_snapshot) return;
    if ((cfg.episodes && episode >= late_episode) || (cfg.max_steps && meta.steps >= late_step))
      late_snapshot = detail::greedy_snapshot(q);
  };

  auto budget_left = [&](std::size_t episode) {
    return (cfg.episodes == 0 || episode < cfg.episodes) &&
           (cfg.max_steps == 0 || meta.steps < cfg.max_steps);
  };

  for (std::size_t episode = 0; budget_left(episode); ++episode) {
    env.reset();
    EpisodeStats stats;
    bool complete = false;
    while (true) {
      maybe_snapshot(episode);
      const StateIndex s = env.state_index();
      const ActionIndex a =
          detail::epsilon_greedy(q, slice_for(cfg.mode, env.remaining()), s,
                                 cfg.schedule.epsilon, rng);
      const StepResult step = env.step(a);
      const Transition t{s, a, step.reward, env.state_index(), step.termination, env.remaining()};
      ++meta.steps;
      stats.total_reward += step.reward;
      ++stats.length;

      if (!buffer) {
        detail::apply_td_update(q, cfg.mode, cfg.schedule, cfg.gamma, t);
        ++meta.updates;
      } else {
        buffer->push(t);
        for (std::size_t k = 0; k < cfg.updates_per_step; ++k) {
          if (buffer->empty()) {
            ++meta.skipped_updates;
            continue;
          }
          detail::apply_td_update(q, cfg.mode, cfg.schedule, cfg.gamma, buffer->sample(replay_rng));
          ++meta.updates;
        }
      }
      if (observer) observer(meta.steps, q);

      if (step.terminated()) {
        stats.termination = step.termination;
        complete = true;
        break;
      }
      if (cfg.max_steps && meta.steps >= cfg.max_steps) break;
    }
    if (complete) result.curve.push_back(stats);
  }
  if (late_snapshot)
    meta.late_policy_changes = detail::count_changes(*late_snapshot, detail::greedy_snapshot(q));
  return result;
}

/// Runs one episode acting greedily (lowest-index ties) on the table.
template <FiniteEnvironment E>
EpisodeStats greedy_episode(TimeLimit<E>& env, const QTable& q, TimeoutMode mode) {
  env.reset();
  EpisodeStats stats;
  while (true) {
    const StepResult step =
        env.step(q.greedy(slice_for(mode, env.remaining()), env.state_index()));
    stats.total_reward += step.reward;
    ++stats.length;
    if (step.terminated()) {
      stats.termination = step.termination;
      return stats;
    }
  }
}

}  // namespace timelimits
