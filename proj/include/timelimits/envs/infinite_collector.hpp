#pragma once

#include <cstdint>

#include "timelimits/core/environment.hpp"
#include "timelimits/core/random.hpp"
#include "timelimits/envs/grid.hpp"

namespace timelimits {

struct InfiniteCollectorConfig {
  int width = 7;
  int height = 7;

  void validate() const {
    if (width < 1 || height < 1 || width * height < 2)
      throw InvalidInput("infinite_collector: grid needs at least 2 cells");
  }
};

/// Endless target collection: the agent earns +1 whenever it steps onto the
/// target, which then respawns uniformly on another cell. Moves are free and
/// nothing ever terminates. Observations are the one-hot agent cell followed
/// by the one-hot target cell.
class InfiniteCollectorEnv {
 public:
  explicit InfiniteCollectorEnv(InfiniteCollectorConfig config = {}, std::uint64_t seed = 0)
      : config_(config), rng_(seed, 0xc011) {
    config_.validate();
  }

  Observation reset() {
    agent_ = rng_.below(cells());
    respawn_target();
    done_ = false;
    return observe();
  }

  StepResult step(ActionIndex action) {
    detail::require_running(done_, "infinite_collector");
    detail::require_action(action, 4, "infinite_collector");
    const grid::Cell next = grid::apply_move(cell(agent_), action, config_.width, config_.height);
    agent_ = static_cast<std::size_t>(next.row * config_.width + next.col);
    double reward = 0.0;
    if (agent_ == target_) {
      reward = 1.0;
      respawn_target();
    }
    return {observe(), reward, std::nullopt};
  }

  [[nodiscard]] std::size_t num_actions() const { return 4; }
  [[nodiscard]] std::size_t num_actions_in(StateIndex) const { return 4; }
  [[nodiscard]] std::size_t observation_dim() const { return 2 * cells(); }
  /// agent cell * cells + target cell
  [[nodiscard]] StateIndex state_index() const { return agent_ * cells() + target_; }
  [[nodiscard]] bool done() const { return done_; }

  [[nodiscard]] const InfiniteCollectorConfig& config() const { return config_; }
  [[nodiscard]] grid::Cell agent() const { return cell(agent_); }
  [[nodiscard]] grid::Cell target() const { return cell(target_); }

 private:
  [[nodiscard]] std::size_t cells() const {
    return static_cast<std::size_t>(config_.width * config_.height);
  }
  [[nodiscard]] grid::Cell cell(std::size_t i) const {
    return {static_cast<int>(i) / config_.width, static_cast<int>(i) % config_.width};
  }
  void respawn_target() {
    const std::size_t pick = rng_.below(cells() - 1);
    target_ = pick >= agent_ ? pick + 1 : pick;
  }
  [[nodiscard]] Observation observe() const {
    Observation obs(2 * cells(), 0.0);
    obs[agent_] = 1.0;
    obs[cells() + target_] = 1.0;
    return obs;
  }

  InfiniteCollectorConfig config_;
  Rng rng_;
  std::size_t agent_ = 0;
  std::size_t target_ = 1;
  bool done_ = true;
};

}  // namespace timelimits
