#pragma once

#include <algorithm>
#include <vector>

#include "timelimits/oracle/model.hpp"

namespace timelimits {

/// Optimal finite-horizon values indexed by remaining steps h = 0..T.
/// values[h] has num_states + 1 entries (terminal last, always 0);
/// greedy[0] and q[0] are empty.
struct FiniteHorizonSolution {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::vector<double>>> q;
  std::vector<std::vector<std::vector<ActionIndex>>> greedy;

  [[nodiscard]] std::size_t horizon() const { return values.size() - 1; }
  [[nodiscard]] bool is_greedy(std::size_t h, StateIndex s, ActionIndex a) const {
    const auto& set = greedy[h][s];
    return std::find(set.begin(), set.end(), a) != set.end();
  }
};

inline FiniteHorizonSolution backward_induction(const TabularModel& model, std::size_t horizon,
                                                double gamma) {
  if (horizon < 1) throw InvalidInput("backward induction needs a horizon >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in [0, 1]");
  model.validate();

  const std::size_t n = model.num_states;
  FiniteHorizonSolution sol;
  sol.values.assign(horizon + 1, std::vector<double>(n + 1, 0.0));
  sol.q.resize(horizon + 1);
  sol.greedy.resize(horizon + 1);
  for (std::size_t h = 1; h <= horizon; ++h) {
    sol.q[h].resize(n);
    sol.greedy[h].resize(n);
    for (StateIndex s = 0; s < n; ++s) {
      auto& qs = sol.q[h][s];
      qs.resize(model.num_actions(s));
      for (ActionIndex a = 0; a < qs.size(); ++a)
        qs[a] = detail::backup(model, s, a, sol.values[h - 1], gamma);
      sol.values[h][s] = *std::max_element(qs.begin(), qs.end());
      sol.greedy[h][s] = detail::argmax_set(qs);
    }
  }
  return sol;
}

}  // namespace timelimits
