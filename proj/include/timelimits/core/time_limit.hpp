#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "timelimits/core/environment.hpp"
#include "timelimits/core/errors.hpp"
#include "timelimits/core/types.hpp"

namespace timelimits {

struct TimeLimitConfig {
  std::size_t horizon = 1;
  bool append_remaining_time = false;

  void validate() const {
    if (horizon < 1) throw InvalidInput("time limit horizon must be >= 1");
  }
};

/// Normalised remaining time seen by an agent choosing its action at elapsed
/// step t of a horizon-T episode: 1 at t = 0, falling by 2/T per step.
inline double remaining_time_feature(std::size_t elapsed, std::size_t horizon) {
  return 1.0 - 2.0 * static_cast<double>(elapsed) / static_cast<double>(horizon);
}

/// Ends episodes with TerminationKind::Timeout after `horizon` steps unless the
/// wrapped environment terminated first. An environmental termination on the
/// final step is reported as Environmental.
template <Environment E>
class TimeLimit {
 public:
  TimeLimit(E env, TimeLimitConfig config) : env_(std::move(env)), config_(config) {
    config_.validate();
  }

  Observation reset() {
    elapsed_ = 0;
    done_ = false;
    return decorate(env_.reset());
  }

  StepResult step(ActionIndex action) {
    if (done_)
      throw ContractViolation("time limit: step() called on a terminated episode; call reset()");
    StepResult result = env_.step(action);
    if (result.timeout())
      throw ContractViolation("time limit: wrapped environment emitted a timeout");
    ++elapsed_;
    if (!result.terminated() && elapsed_ >= config_.horizon)
      result.termination = TerminationKind::Timeout;
    done_ = result.terminated();
    result.observation = decorate(std::move(result.observation));
    return result;
  }

  [[nodiscard]] std::size_t observation_dim() const {
    return env_.observation_dim() + (config_.append_remaining_time ? 1 : 0);
  }
  [[nodiscard]] std::size_t num_actions() const { return env_.num_actions(); }
  [[nodiscard]] std::size_t num_actions_in(StateIndex s) const { return env_.num_actions_in(s); }
  [[nodiscard]] StateIndex state_index() const { return env_.state_index(); }
  [[nodiscard]] bool done() const { return done_; }

  [[nodiscard]] std::size_t elapsed() const { return elapsed_; }
  [[nodiscard]] std::size_t remaining() const { return config_.horizon - elapsed_; }
  [[nodiscard]] std::size_t horizon() const { return config_.horizon; }
  [[nodiscard]] const TimeLimitConfig& config() const { return config_; }

  [[nodiscard]] E& base() { return env_; }
  [[nodiscard]] const E& base() const { return env_; }

 private:
  Observation decorate(Observation obs) const {
    if (config_.append_remaining_time)
      obs.push_back(remaining_time_feature(elapsed_, config_.horizon));
    return obs;
  }

  E env_;
  TimeLimitConfig config_;
  std::size_t elapsed_ = 0;
  bool done_ = true;
};

template <Environment E>
TimeLimit<E> wrap_time_limit(E env, TimeLimitConfig config) {
  return TimeLimit<E>(std::move(env), config);
}

}  // namespace timelimits
