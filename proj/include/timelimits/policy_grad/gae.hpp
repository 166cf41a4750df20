#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "timelimits/core/errors.hpp"
#include "timelimits/policy_grad/trajectory.hpp"

namespace timelimits {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> targets;  // advantage + value
};

/// Generalised advantage estimation with optional partial-episode bootstrapping.
///
///   delta_t = r_t + gamma * c_t * v(s_{t+1}) - v(s_t)
///   A_t     = delta_t + gamma * lambda * A_{t+1}   (within a segment)
///
/// c_t is 0 after an environmental termination, 0 after a timeout unless
/// `peb`, and 1 otherwise. The value after a segment's last step comes from
/// its `bootstrap_value`.
inline GaeResult gae_advantages(const TrajectoryBatch& batch, double gamma, double lambda,
                                bool peb) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in [0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("lambda must lie in [0, 1]");
  const std::size_t n = batch.steps.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.targets.assign(n, 0.0);

  auto bootstrap = [&](std::size_t t) {
    const auto& v = batch.steps[t].bootstrap_value;
    if (!v)
      throw InvalidBatch("step " + std::to_string(t) +
                         " ends a segment that bootstraps but has no final-state value");
    return *v;
  };

  double next_advantage = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const TrajectoryStep& step = batch.steps[t];
    const bool segment_end = step.termination.has_value() || t + 1 == n;
    double continuation = 0.0;
    if (step.termination == TerminationKind::Environmental) {
      continuation = 0.0;
    } else if (step.termination == TerminationKind::Timeout) {
      continuation = peb ? bootstrap(t) : 0.0;
    } else {
      continuation = t + 1 == n ? bootstrap(t) : batch.steps[t + 1].value;
    }
    const double delta = step.reward + gamma * continuation - step.value;
    const double advantage = delta + (segment_end ? 0.0 : gamma * lambda * next_advantage);
    out.advantages[t] = advantage;
    out.targets[t] = advantage + step.value;
    next_advantage = advantage;
  }
  return out;
}

/// Shifts and scales to zero mean and unit standard deviation (guarded by 1e-8).
inline void normalize_advantages(std::vector<double>& advantages) {
  if (advantages.empty()) return;
  double mean = 0.0;
  for (double a : advantages) mean += a;
  mean /= static_cast<double>(advantages.size());
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(advantages.size());
  const double scale = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : advantages) a = (a - mean) * scale;
}

}  // namespace timelimits
