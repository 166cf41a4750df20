#pragma once

#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include "timelimits/core/errors.hpp"
#include "timelimits/core/types.hpp"

namespace timelimits {

/// Reset/step interaction contract shared by every environment and wrapper.
///
/// `state_index()` is the discrete state the agent is in (tabular agents key on
/// it); `observation_dim()` is the length of every observation the instance
/// returns. `num_actions()` is the largest action count over all states.
template <class E>
concept Environment = requires(E& env, const E& cenv, ActionIndex action, StateIndex state) {
  { env.reset() } -> std::same_as<Observation>;
  { env.step(action) } -> std::same_as<StepResult>;
  { cenv.observation_dim() } -> std::convertible_to<std::size_t>;
  { cenv.num_actions() } -> std::convertible_to<std::size_t>;
  { cenv.num_actions_in(state) } -> std::convertible_to<std::size_t>;
  { cenv.state_index() } -> std::convertible_to<StateIndex>;
  { cenv.done() } -> std::convertible_to<bool>;
};

/// Environments with a finite state space and an exact transition model.
/// Non-terminal states are numbered 0..num_states()-1; index num_states() is
/// the terminal pseudo-state that absorbs environmental terminations.
template <class E>
concept FiniteEnvironment =
    Environment<E> && requires(const E& cenv, StateIndex state, ActionIndex action) {
      { cenv.num_states() } -> std::convertible_to<std::size_t>;
      { cenv.transitions(state, action) } -> std::same_as<std::vector<Outcome>>;
    };

struct StateEnumeration {
  std::vector<StateIndex> non_terminal;
  StateIndex terminal = 0;
};

template <Environment E>
StateEnumeration enumerate_states(const E& env) {
  if constexpr (FiniteEnvironment<E>) {
    StateEnumeration out;
    out.non_terminal.reserve(env.num_states());
    for (StateIndex s = 0; s < env.num_states(); ++s) out.non_terminal.push_back(s);
    out.terminal = env.num_states();
    return out;
  } else {
    (void)env;
    throw UnsupportedOperation("environment has no finite state enumeration");
  }
}

template <Environment E>
std::vector<Outcome> transition_model(const E& env, StateIndex state, ActionIndex action) {
  if constexpr (FiniteEnvironment<E>) {
    if (state >= env.num_states())
      throw InvalidInput("state " + std::to_string(state) + " is not a non-terminal state");
    if (action >= env.num_actions_in(state))
      throw InvalidInput("action " + std::to_string(action) + " is invalid in state " +
                         std::to_string(state));
    return env.transitions(state, action);
  } else {
    (void)env, (void)state, (void)action;
    throw UnsupportedOperation("environment has no exact transition model");
  }
}

namespace detail {

inline void require_running(bool done, const char* env_name) {
  if (done)
    throw ContractViolation(std::string(env_name) + ": step() called on a terminated episode");
}

inline void require_action(ActionIndex action, std::size_t count, const char* env_name) {
  if (action >= count)
    throw InvalidInput(std::string(env_name) + ": action " + std::to_string(action) +
                       " out of range (" + std::to_string(count) + " actions)");
}

inline Observation one_hot(std::size_t index, std::size_t size) {
  Observation obs(size, 0.0);
  if (index < size) obs[index] = 1.0;
  return obs;
}

/// Draws an outcome from a model row; used by stochastic environments so that
/// step() and transitions() can never disagree.
template <class Rng>
const Outcome& sample_outcome(const std::vector<Outcome>& row, Rng& rng) {
  double u = rng.uniform();
  for (const auto& outcome : row) {
    if (u < outcome.probability) return outcome;
    u -= outcome.probability;
  }
  return row.back();
}

}  // namespace detail
}  // namespace timelimits
