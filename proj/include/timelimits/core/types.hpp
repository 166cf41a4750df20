#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace timelimits {

using Observation = std::vector<double>;
using StateIndex = std::size_t;
using ActionIndex = std::size_t;

/// Why an episode ended. Base environments only ever report Environmental;
/// Timeout is produced by the time-limit wrapper.
enum class TerminationKind { Environmental, Timeout };

constexpr std::string_view to_string(TerminationKind kind) {
  return kind == TerminationKind::Environmental ? "environmental" : "timeout";
}

struct StepResult {
  Observation observation;
  double reward = 0.0;
  std::optional<TerminationKind> termination;

  [[nodiscard]] bool terminated() const { return termination.has_value(); }
  [[nodiscard]] bool environmental() const { return termination == TerminationKind::Environmental; }
  [[nodiscard]] bool timeout() const { return termination == TerminationKind::Timeout; }
};

/// One branch of an exact transition model.
struct Outcome {
  StateIndex next_state = 0;
  double probability = 0.0;
  double reward = 0.0;
  bool environmental_termination = false;
};

}  // namespace timelimits
