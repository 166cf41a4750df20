#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "timelimits/envs/two_goal_gridworld.hpp"
#include "timelimits/oracle/model.hpp"

namespace timelimits {

/// Values a time-unaware, timeout-as-terminal learner settles on in the
/// Two-Goal gridworld. Goal-adjacent cells are pinned to the value of the
/// move into the goal; every other cell is a move that bootstraps from its
/// best neighbour on (T-1)/T of the visits and is cut off by the timeout on
/// the remaining 1/T.
struct TimeUnawareFixedPoint {
  std::vector<double> values;                  // per non-goal state
  std::vector<bool> pinned;                    // goal-adjacent
  std::vector<std::vector<ActionIndex>> greedy;  // best moves (N, S, E, W)
  std::size_t iterations = 0;
};

inline TimeUnawareFixedPoint fixed_point_time_unaware(const TwoGoalGridworldEnv& env,
                                                      double gamma, std::size_t horizon = 3) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in [0, 1]");
  if (horizon < 1) throw InvalidInput("horizon must be >= 1");
  const auto& cfg = env.config();
  const std::size_t n = env.num_states();
  const double bootstrap_share = static_cast<double>(horizon - 1) / static_cast<double>(horizon);
  const double penalty = cfg.move_penalty;

  // For each state and move: the successor index, or the goal reward entered.
  struct Edge {
    bool goal = false;
    double goal_value = 0.0;
    StateIndex next = 0;
  };
  std::vector<std::array<Edge, 4>> edges(n);
  TimeUnawareFixedPoint fp;
  fp.values.assign(n, 0.0);
  fp.pinned.assign(n, false);
  for (StateIndex s = 0; s < n; ++s) {
    for (std::size_t m = 0; m < 4; ++m) {
      const grid::Cell next = grid::apply_move(env.cell_of(s), m, cfg.width, cfg.height);
      Edge& e = edges[s][m];
      if (next == env.far_goal()) {
        e = {true, cfg.far_goal_reward + penalty, 0};
      } else if (next == env.near_goal()) {
        e = {true, cfg.near_goal_reward + penalty, 0};
      } else {
        e.next = env.index_of(next);
      }
      if (e.goal) {
        fp.values[s] = fp.pinned[s] ? std::max(fp.values[s], e.goal_value) : e.goal_value;
        fp.pinned[s] = true;
      }
    }
  }

  auto move_value = [&](StateIndex s, std::size_t m, const std::vector<double>& v) {
    const Edge& e = edges[s][m];
    return e.goal ? e.goal_value : v[e.next];
  };

  std::vector<double> next = fp.values;
  for (std::size_t it = 1;; ++it) {
    double change = 0.0;
    for (StateIndex s = 0; s < n; ++s) {
      if (fp.pinned[s]) continue;
      double best = -INFINITY;
      for (std::size_t m = 0; m < 4; ++m) best = std::max(best, move_value(s, m, fp.values));
      next[s] = bootstrap_share * (penalty + gamma * best) + (1.0 - bootstrap_share) * penalty;
      change = std::max(change, std::abs(next[s] - fp.values[s]));
    }
    fp.values.swap(next);
    if (change < 1e-12) {
      fp.iterations = it;
      break;
    }
    if (it >= 1'000'000) throw NonConvergence("time-unaware fixed point did not converge");
  }

  fp.greedy.resize(n);
  for (StateIndex s = 0; s < n; ++s) {
    std::vector<double> q(4);
    for (std::size_t m = 0; m < 4; ++m) {
      // a goal-adjacent cell's value is the goal move itself; other moves are not scored
      q[m] = fp.pinned[s] && !edges[s][m].goal ? -INFINITY : move_value(s, m, fp.values);
    }
    fp.greedy[s] = detail::argmax_set(q);
  }
  return fp;
}

}  // namespace timelimits
