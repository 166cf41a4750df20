#pragma once

#include <cstdint>
#include <vector>

#include "timelimits/core/environment.hpp"
#include "timelimits/core/random.hpp"

namespace timelimits {

struct QueueOfCarsConfig {
  std::size_t exit_distance = 9;

  void validate() const {
    if (exit_distance < 1) throw InvalidInput("queue_of_cars: exit_distance must be >= 1");
  }
};

/// A car stuck in a queue `exit_distance` slots from the exit. "Safe" advances
/// with probability 0.5; "dangerous" advances with 0.8, crashes with 0.1 and
/// otherwise stays. Reaching the exit pays +1 and terminates; a crash
/// terminates with 0.
class QueueOfCarsEnv {
 public:
  static constexpr ActionIndex kSafe = 0;
  static constexpr ActionIndex kDangerous = 1;
  static constexpr double kSafeAdvance = 0.5;
  static constexpr double kDangerousAdvance = 0.8;
  static constexpr double kCrash = 0.1;

  explicit QueueOfCarsEnv(QueueOfCarsConfig config = {}, std::uint64_t seed = 0)
      : config_(config), rng_(seed, 0x9ca5) {
    config_.validate();
  }

  Observation reset() {
    position_ = 0;
    done_ = false;
    return observe();
  }

  StepResult step(ActionIndex action) {
    detail::require_running(done_, "queue_of_cars");
    detail::require_action(action, 2, "queue_of_cars");
    const auto row = transitions(position_, action);
    const Outcome& o = detail::sample_outcome(row, rng_);
    position_ = o.next_state;
    done_ = o.environmental_termination;
    StepResult result{observe(), o.reward, std::nullopt};
    if (done_) result.termination = TerminationKind::Environmental;
    return result;
  }

  [[nodiscard]] std::vector<Outcome> transitions(StateIndex p, ActionIndex a) const {
    const StateIndex terminal = num_states();
    const bool exits = p + 1 == config_.exit_distance;
    const Outcome advance = exits ? Outcome{terminal, 0.0, 1.0, true} : Outcome{p + 1, 0.0, 0.0, false};
    if (a == kSafe) {
      Outcome fwd = advance;
      fwd.probability = kSafeAdvance;
      return {fwd, {p, 1.0 - kSafeAdvance, 0.0, false}};
    }
    Outcome fwd = advance;
    fwd.probability = kDangerousAdvance;
    return {fwd, {terminal, kCrash, 0.0, true}, {p, 1.0 - kDangerousAdvance - kCrash, 0.0, false}};
  }

  [[nodiscard]] std::size_t num_states() const { return config_.exit_distance; }
  [[nodiscard]] std::size_t num_actions() const { return 2; }
  [[nodiscard]] std::size_t num_actions_in(StateIndex) const { return 2; }
  [[nodiscard]] std::size_t observation_dim() const { return config_.exit_distance; }
  [[nodiscard]] StateIndex state_index() const { return position_; }
  [[nodiscard]] bool done() const { return done_; }
  [[nodiscard]] const QueueOfCarsConfig& config() const { return config_; }

 private:
  [[nodiscard]] Observation observe() const {
    return detail::one_hot(position_, config_.exit_distance);
  }

  QueueOfCarsConfig config_;
  Rng rng_;
  StateIndex position_ = 0;
  bool done_ = true;
};

}  // namespace timelimits
