#pragma once

#include <cstdint>
#include <vector>

#include "timelimits/core/environment.hpp"
#include "timelimits/core/random.hpp"

namespace timelimits {

/// Two states. From A the agent may stay (reward 0) or jump to B (reward +1);
/// B is an inescapable trap whose single action costs -1. There is no
/// environmental termination, so the optimal time-limited plan is to jump on
/// the last step.
class LastMomentEnv {
 public:
  static constexpr StateIndex kA = 0;
  static constexpr StateIndex kB = 1;
  static constexpr ActionIndex kStay = 0;
  static constexpr ActionIndex kJump = 1;
  static constexpr ActionIndex kOnly = 0;

  explicit LastMomentEnv(std::uint64_t seed = 0) : rng_(seed, 0x1a57) {}

  Observation reset() {
    state_ = kA;
    done_ = false;
    return observe();
  }

  StepResult step(ActionIndex action) {
    detail::require_running(done_, "last_moment");
    detail::require_action(action, num_actions_in(state_), "last_moment");
    const Outcome o = transitions(state_, action).front();
    state_ = o.next_state;
    return {observe(), o.reward, std::nullopt};
  }

  [[nodiscard]] std::vector<Outcome> transitions(StateIndex s, ActionIndex a) const {
    if (s == kA && a == kJump) return {{kB, 1.0, 1.0, false}};
    if (s == kA) return {{kA, 1.0, 0.0, false}};
    return {{kB, 1.0, -1.0, false}};
  }

  [[nodiscard]] std::size_t num_states() const { return 2; }
  [[nodiscard]] std::size_t num_actions() const { return 2; }
  [[nodiscard]] std::size_t num_actions_in(StateIndex s) const { return s == kA ? 2 : 1; }
  [[nodiscard]] std::size_t observation_dim() const { return 2; }
  [[nodiscard]] StateIndex state_index() const { return state_; }
  [[nodiscard]] bool done() const { return done_; }

 private:
  [[nodiscard]] Observation observe() const { return detail::one_hot(state_, 2); }

  Rng rng_;  // unused: the dynamics are deterministic
  StateIndex state_ = kA;
  bool done_ = true;
};

}  // namespace timelimits
