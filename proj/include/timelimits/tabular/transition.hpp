#pragma once

#include <optional>

#include "timelimits/core/types.hpp"

namespace timelimits {

struct Transition {
  StateIndex state = 0;
  ActionIndex action = 0;
  double reward = 0.0;
  StateIndex next_state = 0;
  std::optional<TerminationKind> termination;
  /// Steps left once this transition has happened (the remaining time at next_state).
  std::size_t remaining = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

}  // namespace timelimits
