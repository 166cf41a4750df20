#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "timelimits/core/time_limit.hpp"
#include "timelimits/envs/queue_of_cars.hpp"
#include "timelimits/oracle/backward_induction.hpp"

namespace timelimits {

/// Action probabilities for one observation.
using PolicyFn = std::function<std::vector<double>(const Observation&)>;

/// Observation a Queue of Cars agent sees at `position` with `remaining`
/// steps left of a horizon-T episode.
inline Observation queue_observation(const QueueOfCarsConfig& cfg, StateIndex position,
                                     std::size_t remaining, std::size_t horizon, bool time_aware) {
  if (position >= cfg.exit_distance) throw InvalidInput("queue position out of range");
  if (remaining < 1 || remaining > horizon) throw InvalidInput("remaining time out of range");
  Observation obs(cfg.exit_distance, 0.0);
  obs[position] = 1.0;
  if (time_aware) obs.push_back(remaining_time_feature(horizon - remaining, horizon));
  return obs;
}

/// heatmap[p][h - 1] = probability of the dangerous action at position p with
/// h steps remaining.
using Heatmap = std::vector<std::vector<double>>;

inline Heatmap policy_heatmap(const PolicyFn& policy, const QueueOfCarsConfig& cfg,
                              std::size_t horizon, bool time_aware) {
  Heatmap out(cfg.exit_distance, std::vector<double>(horizon, 0.0));
  for (StateIndex p = 0; p < cfg.exit_distance; ++p)
    for (std::size_t h = 1; h <= horizon; ++h)
      out[p][h - 1] = policy(queue_observation(cfg, p, h, horizon, time_aware))
          .at(QueueOfCarsEnv::kDangerous);
  return out;
}

/// Deterministic oracle policy rendered as probabilities: dangerous gets 1
/// whenever it belongs to the greedy set. Only valid for time-aware inputs.
inline PolicyFn oracle_queue_policy(const FiniteHorizonSolution& sol, const QueueOfCarsConfig& cfg) {
  const std::size_t horizon = sol.horizon();
  return [sol, cfg, horizon](const Observation& obs) {
    if (obs.size() != cfg.exit_distance + 1)
      throw InvalidInput("oracle policy needs a time-aware observation");
    StateIndex p = 0;
    while (p < cfg.exit_distance && obs[p] != 1.0) ++p;
    if (p == cfg.exit_distance) throw InvalidInput("observation has no position bit");
    const double elapsed = (1.0 - obs.back()) * static_cast<double>(horizon) / 2.0;
    const auto h = horizon - static_cast<std::size_t>(std::lround(elapsed));
    const bool dangerous = sol.is_greedy(h, p, QueueOfCarsEnv::kDangerous);
    return std::vector<double>{dangerous ? 0.0 : 1.0, dangerous ? 1.0 : 0.0};
  };
}

/// CSV with header `position,h1,...,hT`; one row per position.
inline std::string heatmap_csv(const Heatmap& map) {
  std::ostringstream os;
  os << "position";
  const std::size_t horizon = map.empty() ? 0 : map.front().size();
  for (std::size_t h = 1; h <= horizon; ++h) os << ",h" << h;
  os << '\n';
  os.precision(17);
  for (std::size_t p = 0; p < map.size(); ++p) {
    os << p;
    for (double v : map[p]) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

struct QueuePolicyReport {
  std::size_t pairs_considered = 0;  // (position, h) visited with probability >= threshold
  std::size_t pairs_matched = 0;     // learned argmax in the oracle greedy set
  double success_probability = 0.0;  // exact, under the stochastic policy
  std::vector<std::vector<double>> visitation;  // [h][position]

  [[nodiscard]] double match_fraction() const {
    return pairs_considered ? static_cast<double>(pairs_matched) /
                                  static_cast<double>(pairs_considered)
                            : 0.0;
  }
};

/// Exact forward pass of the state distribution under `policy`, scoring the
/// argmax action at every sufficiently visited (position, h) pair against the
/// finite-horizon oracle.
inline QueuePolicyReport analyze_queue_policy(const PolicyFn& policy, const QueueOfCarsConfig& cfg,
                                              std::size_t horizon, double gamma, bool time_aware,
                                              double min_visit = 0.01) {
  const QueueOfCarsEnv env(cfg);
  const auto sol = backward_induction(build_model(env), horizon, gamma);
  const std::size_t n = cfg.exit_distance;
  QueuePolicyReport report;
  report.visitation.assign(horizon + 1, std::vector<double>(n, 0.0));
  std::vector<double> mass(n, 0.0);
  mass[0] = 1.0;
  for (std::size_t h = horizon; h >= 1; --h) {
    std::vector<double> next(n, 0.0);
    for (StateIndex p = 0; p < n; ++p) {
      if (mass[p] == 0.0) continue;
      report.visitation[h][p] = mass[p];
      const auto probs = policy(queue_observation(cfg, p, h, horizon, time_aware));
      if (mass[p] >= min_visit) {
        const ActionIndex best = probs[1] > probs[0] ? 1 : 0;
        ++report.pairs_considered;
        if (sol.is_greedy(h, p, best)) ++report.pairs_matched;
      }
      for (ActionIndex a = 0; a < 2; ++a)
        for (const auto& o : env.transitions(p, a)) {
          const double w = mass[p] * probs[a] * o.probability;
          if (o.reward > 0.0) report.success_probability += w;
          else if (!o.environmental_termination) next[o.next_state] += w;
        }
    }
    mass = std::move(next);
  }
  return report;
}

}  // namespace timelimits
