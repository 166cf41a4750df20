#pragma once

#include <optional>
#include <vector>

#include "timelimits/core/types.hpp"

namespace timelimits {

struct TrajectoryStep {
  Observation observation;
  ActionIndex action = 0;
  double reward = 0.0;
  double log_prob = 0.0;  // under the behaviour policy
  double value = 0.0;     // v(observation) under the behaviour value head
  std::optional<TerminationKind> termination;
  /// v of the observation reached by this step. Needed on the last step of a
  /// segment that ends at a timeout (when bootstrapping through it) or at the
  /// batch boundary.
  std::optional<double> bootstrap_value;
};

/// Consecutive steps of one or more partial episodes. A segment ends at a
/// step carrying a termination or at the end of the batch.
struct TrajectoryBatch {
  std::vector<TrajectoryStep> steps;

  [[nodiscard]] std::size_t size() const { return steps.size(); }
};

}  // namespace timelimits
