#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "timelimits/core/environment.hpp"
#include "timelimits/core/random.hpp"
#include "timelimits/envs/grid.hpp"

namespace timelimits {

struct ReplayGridConfig {
  int width = 10;
  int height = 10;
  std::vector<grid::Cell> walls;  // blocked cells; moves into them leave the agent in place

  [[nodiscard]] grid::Cell start() const { return {height - 1, 0}; }
  [[nodiscard]] grid::Cell goal() const { return {0, width - 1}; }
  [[nodiscard]] bool is_wall(grid::Cell c) const {
    return std::find(walls.begin(), walls.end(), c) != walls.end();
  }

  void validate() const {
    if (width < 1 || height < 1 || width * height < 2)
      throw InvalidInput("replay_grid: grid needs at least 2 cells");
    for (const auto& w : walls) {
      if (w.row < 0 || w.row >= height || w.col < 0 || w.col >= width)
        throw InvalidInput("replay_grid: wall outside the grid");
      if (w == start() || w == goal()) throw InvalidInput("replay_grid: wall on start or goal");
    }
  }
};

/// Deterministic corner-to-corner gridworld: fixed start bottom-left, goal
/// top-right, -1 per step, four cardinal moves.
class ReplayGridworldEnv {
 public:
  explicit ReplayGridworldEnv(ReplayGridConfig config = {}, std::uint64_t seed = 0)
      : config_(std::move(config)), rng_(seed, 0x7e91) {
    config_.validate();
    index_of_cell_.assign(config_.width * config_.height, kNoIndex);
    for (int r = 0; r < config_.height; ++r)
      for (int c = 0; c < config_.width; ++c) {
        const grid::Cell cell{r, c};
        if (cell == config_.goal() || config_.is_wall(cell)) continue;
        index_of_cell_[r * config_.width + c] = cells_.size();
        cells_.push_back(cell);
      }
  }

  Observation reset() {
    state_ = index_of(config_.start());
    done_ = false;
    return observe();
  }

  StepResult step(ActionIndex action) {
    detail::require_running(done_, "replay_grid");
    detail::require_action(action, 4, "replay_grid");
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
  [[nodiscard]] std::size_t num_actions() const { return 4; }
  [[nodiscard]] std::size_t num_actions_in(StateIndex) const { return 4; }
  [[nodiscard]] std::size_t observation_dim() const { return cells_.size(); }
  [[nodiscard]] StateIndex state_index() const { return state_; }
  [[nodiscard]] bool done() const { return done_; }

  [[nodiscard]] const ReplayGridConfig& config() const { return config_; }
  [[nodiscard]] grid::Cell cell_of(StateIndex s) const { return cells_.at(s); }
  [[nodiscard]] StateIndex index_of(grid::Cell c) const {
    return index_of_cell_.at(c.row * config_.width + c.col);
  }

 private:
  static constexpr StateIndex kNoIndex = static_cast<StateIndex>(-1);

  [[nodiscard]] Outcome transition(StateIndex s, ActionIndex a) const {
    const grid::Cell here = cells_.at(s);
    grid::Cell next = grid::apply_move(here, a, config_.width, config_.height);
    if (config_.is_wall(next)) next = here;
    if (next == config_.goal()) return {num_states(), 1.0, -1.0, true};
    return {index_of(next), 1.0, -1.0, false};
  }

  [[nodiscard]] Observation observe() const { return detail::one_hot(state_, cells_.size()); }

  ReplayGridConfig config_;
  Rng rng_;
  std::vector<grid::Cell> cells_;
  std::vector<StateIndex> index_of_cell_;
  StateIndex state_ = 0;
  bool done_ = true;
};

}  // namespace timelimits
