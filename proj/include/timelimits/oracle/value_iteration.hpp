#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "timelimits/oracle/model.hpp"

namespace timelimits {

struct InfiniteHorizonSolution {
  std::vector<double> values;  // num_states + 1, terminal last
  std::vector<std::vector<double>> q;
  std::vector<std::vector<ActionIndex>> greedy;
  double gamma = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;

  [[nodiscard]] bool is_greedy(StateIndex s, ActionIndex a) const {
    return std::find(greedy[s].begin(), greedy[s].end(), a) != greedy[s].end();
  }
};

struct ValueIterationOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 1'000'000;
};

/// Synchronous value iteration until the sup-norm Bellman residual drops below
/// the tolerance.
inline InfiniteHorizonSolution value_iteration(const TabularModel& model, double gamma,
                                               ValueIterationOptions options = {}) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in [0, 1]");
  if (!(options.tolerance > 0.0)) throw InvalidInput("tolerance must be positive");
  model.validate();

  const std::size_t n = model.num_states;
  std::vector<double> v(n + 1, 0.0), next(n + 1, 0.0);
  InfiniteHorizonSolution sol;
  sol.gamma = gamma;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    double residual = 0.0;
    for (StateIndex s = 0; s < n; ++s) {
      double best = -INFINITY;
      for (ActionIndex a = 0; a < model.num_actions(s); ++a)
        best = std::max(best, detail::backup(model, s, a, v, gamma));
      next[s] = best;
      residual = std::max(residual, std::abs(best - v[s]));
    }
    std::swap(v, next);
    if (!std::isfinite(residual)) break;
    if (residual < options.tolerance) {
      sol.iterations = it;
      sol.values = v;
      sol.q.resize(n);
      sol.greedy.resize(n);
      double final_residual = 0.0;
      for (StateIndex s = 0; s < n; ++s) {
        auto& qs = sol.q[s];
        qs.resize(model.num_actions(s));
        for (ActionIndex a = 0; a < qs.size(); ++a) qs[a] = detail::backup(model, s, a, v, gamma);
        final_residual =
            std::max(final_residual, std::abs(*std::max_element(qs.begin(), qs.end()) - v[s]));
        sol.greedy[s] = detail::argmax_set(qs);
      }
      sol.residual = final_residual;
      return sol;
    }
  }
  throw NonConvergence("value iteration did not reach tolerance within " +
                       std::to_string(options.max_iterations) + " sweeps");
}

}  // namespace timelimits
