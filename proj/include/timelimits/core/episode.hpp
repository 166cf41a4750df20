#pragma once

#include <optional>
#include <vector>

#include "timelimits/core/environment.hpp"
#include "timelimits/core/types.hpp"

namespace timelimits {

struct EpisodeStep {
  Observation observation;  // seen before acting
  StateIndex state = 0;
  ActionIndex action = 0;
  double reward = 0.0;
  std::optional<TerminationKind> termination;
};

struct EpisodeRecord {
  std::vector<EpisodeStep> steps;

  [[nodiscard]] std::vector<double> rewards() const {
    std::vector<double> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.reward);
    return out;
  }
  [[nodiscard]] std::optional<TerminationKind> termination() const {
    return steps.empty() ? std::nullopt : steps.back().termination;
  }
};

/// Plays one episode from reset. `policy(observation, state)` returns an action.
/// `max_steps` guards unbounded environments.
template <Environment E, class Policy>
EpisodeRecord run_episode(E& env, Policy&& policy, std::size_t max_steps = 1'000'000) {
  EpisodeRecord record;
  Observation obs = env.reset();
  for (std::size_t i = 0; i < max_steps; ++i) {
    const StateIndex state = env.state_index();
    const ActionIndex action = policy(obs, state);
    StepResult result = env.step(action);
    record.steps.push_back({std::move(obs), state, action, result.reward, result.termination});
    if (result.terminated()) break;
    obs = std::move(result.observation);
  }
  return record;
}

}  // namespace timelimits
