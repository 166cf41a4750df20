#pragma once

#include "timelimits/core/errors.hpp"
#include "timelimits/tabular/q_table.hpp"
#include "timelimits/tabular/transition.hpp"

namespace timelimits {

/// Slice of a Q table that holds the values of a state with `remaining` steps left.
inline std::size_t slice_for(TimeoutMode mode, std::size_t remaining) {
  return mode == TimeoutMode::TimeAware ? remaining - 1 : 0;
}

/// One-step TD target.
///   Standard:  r at any termination, else r + gamma max_a Q[s'][a]
///   TimeAware: r at any termination, else r + gamma max_a Q[h-1][s'][a]
///   PEB:       r at environmental terminations only, else r + gamma max_a Q[s'][a]
inline double td_target(TimeoutMode mode, const Transition& t, const QTable& q, double gamma) {
  const bool cut = mode == TimeoutMode::PEB
                       ? t.termination == TerminationKind::Environmental
                       : t.termination.has_value();
  if (cut) return t.reward;
  if (mode == TimeoutMode::TimeAware) {
    if (t.remaining == 0)
      throw ContractViolation("time-aware target requested with no remaining time");
    if (t.remaining > q.slices())
      throw ContractViolation("remaining time exceeds the table's horizon");
  }
  return t.reward + gamma * q.max_value(slice_for(mode, t.remaining), t.next_state);
}

}  // namespace timelimits
