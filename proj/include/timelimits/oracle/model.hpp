#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "timelimits/core/environment.hpp"
#include "timelimits/core/errors.hpp"

namespace timelimits {

/// Exact finite MDP: rows[s][a] lists the outcomes of action a in state s.
/// Index num_states is the terminal pseudo-state with value 0.
struct TabularModel {
  std::size_t num_states = 0;
  std::vector<std::vector<std::vector<Outcome>>> rows;

  [[nodiscard]] StateIndex terminal() const { return num_states; }
  [[nodiscard]] std::size_t num_actions(StateIndex s) const { return rows[s].size(); }

  /// Throws InvalidModel unless every row is a distribution over valid successors.
  void validate(double tolerance = 1e-12) const {
    if (rows.size() != num_states) throw InvalidModel("model row count differs from state count");
    for (StateIndex s = 0; s < num_states; ++s) {
      if (rows[s].empty()) throw InvalidModel("state " + std::to_string(s) + " has no actions");
      for (std::size_t a = 0; a < rows[s].size(); ++a) {
        double total = 0.0;
        for (const Outcome& o : rows[s][a]) {
          if (!(o.probability >= 0.0) || !std::isfinite(o.reward))
            throw InvalidModel("bad outcome in row (" + std::to_string(s) + ", " +
                               std::to_string(a) + ")");
          if (o.environmental_termination ? o.next_state != terminal()
                                          : o.next_state >= num_states)
            throw InvalidModel("successor out of range in row (" + std::to_string(s) + ", " +
                               std::to_string(a) + ")");
          total += o.probability;
        }
        if (std::abs(total - 1.0) > tolerance)
          throw InvalidModel("row (" + std::to_string(s) + ", " + std::to_string(a) +
                             ") sums to " + std::to_string(total));
      }
    }
  }
};

template <FiniteEnvironment E>
TabularModel build_model(const E& env) {
  TabularModel model;
  model.num_states = env.num_states();
  model.rows.resize(model.num_states);
  for (StateIndex s = 0; s < model.num_states; ++s)
    for (ActionIndex a = 0; a < env.num_actions_in(s); ++a)
      model.rows[s].push_back(env.transitions(s, a));
  return model;
}

namespace detail {

/// Expected one-step backup of action a in state s against successor values v.
inline double backup(const TabularModel& m, StateIndex s, ActionIndex a,
                     const std::vector<double>& v, double gamma) {
  double q = 0.0;
  for (const Outcome& o : m.rows[s][a])
    q += o.probability * (o.reward + (o.environmental_termination ? 0.0 : gamma * v[o.next_state]));
  return q;
}

/// Indices whose value is within a relative 1e-9 of the maximum.
inline std::vector<ActionIndex> argmax_set(const std::vector<double>& q) {
  double best = q.front();
  for (double x : q) best = std::max(best, x);
  const double slack = 1e-9 * std::max(1.0, std::abs(best));
  std::vector<ActionIndex> out;
  for (ActionIndex a = 0; a < q.size(); ++a)
    if (q[a] >= best - slack) out.push_back(a);
  return out;
}

}  // namespace detail
}  // namespace timelimits
