#pragma once

#include <cstdint>
#include <vector>

#include "timelimits/core/environment.hpp"
#include "timelimits/core/random.hpp"
#include "timelimits/envs/grid.hpp"

namespace timelimits {

struct TwoGoalConfig {
  int width = 7;
  int height = 7;
  double far_goal_reward = 50.0;   // top-right
  double near_goal_reward = 20.0;  // bottom-left
  double move_penalty = -1.0;

  void validate() const {
    if (width < 1 || height < 1 || width * height < 3)
      throw InvalidInput("two_goal: grid needs at least 3 cells");
  }
};

/// Deterministic gridworld with goals in the top-right and bottom-left
/// corners. Every move, including the one entering a goal and bumps into a
/// wall, pays the move penalty; staying is free. Entering a goal terminates
/// with goal reward plus move penalty. Episodes start in a uniformly random
/// non-goal cell.
class TwoGoalGridworldEnv {
 public:
  static constexpr ActionIndex kStay = 4;

  explicit TwoGoalGridworldEnv(TwoGoalConfig config = {}, std::uint64_t seed = 0)
      : config_(config), rng_(seed, 0x2607) {
    config_.validate();
    const int cells = config_.width * config_.height;
    index_of_cell_.assign(cells, kNoIndex);
    for (int r = 0; r < config_.height; ++r)
      for (int c = 0; c < config_.width; ++c) {
        const grid::Cell cell{r, c};
        if (is_goal(cell)) continue;
        index_of_cell_[r * config_.width + c] = cells_.size();
        cells_.push_back(cell);
      }
  }

  Observation reset() {
    state_ = rng_.below(cells_.size());
    done_ = false;
    return observe();
  }

  StepResult step(ActionIndex action) {
    detail::require_running(done_, "two_goal");
    detail::require_action(action, 5, "two_goal");
    const Outcome o = transition(state_, action);
    state_ = o.next_state;
    done_ = o.environmental_termination;
    StepResult result{observe(), o.reward, std::nullopt};
    if (done_) result.termination = TerminationKind::Environmental;
    return result;
  }

  [[nodiscard]] std::vector<Outcome> transitions(StateIndex s, ActionIndex a) const {
    return {transition(s, a)};
  }

  [[nodiscard]] std::size_t num_states() const { return cells_.size(); }
  [[nodiscard]] std::size_t num_actions() const { return 5; }
  [[nodiscard]] std::size_t num_actions_in(StateIndex) const { return 5; }
  [[nodiscard]] std::size_t observation_dim() const { return cells_.size(); }
  [[nodiscard]] StateIndex state_index() const { return state_; }
  [[nodiscard]] bool done() const { return done_; }

  [[nodiscard]] const TwoGoalConfig& config() const { return config_; }
  [[nodiscard]] grid::Cell far_goal() const { return {0, config_.width - 1}; }
  [[nodiscard]] grid::Cell near_goal() const { return {config_.height - 1, 0}; }
  [[nodiscard]] bool is_goal(grid::Cell c) const { return c == far_goal() || c == near_goal(); }
  [[nodiscard]] grid::Cell cell_of(StateIndex s) const { return cells_.at(s); }
  [[nodiscard]] StateIndex index_of(grid::Cell c) const {
    return index_of_cell_.at(c.row * config_.width + c.col);
  }

  /// Put the agent in a given non-goal cell; for tests and tools.
  void place(StateIndex s) {
    state_ = s;
    done_ = false;
  }

 private:
  static constexpr StateIndex kNoIndex = static_cast<StateIndex>(-1);

  [[nodiscard]] Outcome transition(StateIndex s, ActionIndex a) const {
    if (a == kStay) return {s, 1.0, 0.0, false};
    const grid::Cell next = grid::apply_move(cells_.at(s), a, config_.width, config_.height);
    if (next == far_goal())
      return {num_states(), 1.0, config_.far_goal_reward + config_.move_penalty, true};
    if (next == near_goal())
      return {num_states(), 1.0, config_.near_goal_reward + config_.move_penalty, true};
    return {index_of(next), 1.0, config_.move_penalty, false};
  }

  [[nodiscard]] Observation observe() const { return detail::one_hot(state_, cells_.size()); }

  TwoGoalConfig config_;
  Rng rng_;
  std::vector<grid::Cell> cells_;
  std::vector<StateIndex> index_of_cell_;
  StateIndex state_ = 0;
  bool done_ = true;
};

}  // namespace timelimits
