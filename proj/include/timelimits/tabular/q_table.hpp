#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <cstdint>
#include <string_view>
#include <vector>

#include "timelimits/core/errors.hpp"
#include "timelimits/core/random.hpp"
#include "timelimits/core/types.hpp"

namespace timelimits {

/// How an agent treats time-limit terminations.
///  - Standard: a timeout is terminal, and the agent is blind to time.
///  - TimeAware: one Q slice per remaining time h = 1..T; every termination is terminal.
///  - PEB: bootstraps through timeouts; only environmental terminations are terminal.
enum class TimeoutMode { Standard, TimeAware, PEB };

constexpr std::string_view to_string(TimeoutMode m) {
  switch (m) {
    case TimeoutMode::Standard: return "standard";
    case TimeoutMode::TimeAware: return "time_aware";
    case TimeoutMode::PEB: return "peb";
  }
  return "?";
}

inline TimeoutMode parse_timeout_mode(std::string_view s) {
  if (s == "standard") return TimeoutMode::Standard;
  if (s == "time_aware" || s == "ta") return TimeoutMode::TimeAware;
  if (s == "peb") return TimeoutMode::PEB;
  throw InvalidInput("unknown timeout mode '" + std::string(s) + "'");
}

/// Tabular action values with matching visit counts. A time-aware table has
/// one slice per remaining time (slice h-1 holds remaining time h); otherwise
/// there is a single slice.
class QTable {
 public:
  QTable() = default;
  QTable(std::vector<std::size_t> actions_per_state, std::size_t slices, double initial = 0.0)
      : actions_(std::move(actions_per_state)), slices_(slices) {
    if (slices_ == 0) throw InvalidInput("QTable needs at least one slice");
    width_ = actions_.empty() ? 0 : *std::max_element(actions_.begin(), actions_.end());
    values_.assign(slices_ * actions_.size() * width_, initial);
    visits_.assign(values_.size(), 0);
  }

  [[nodiscard]] std::size_t slices() const { return slices_; }
  [[nodiscard]] std::size_t num_states() const { return actions_.size(); }
  [[nodiscard]] std::size_t num_actions(StateIndex s) const { return actions_[s]; }

  double& value(std::size_t slice, StateIndex s, ActionIndex a) { return values_[at(slice, s, a)]; }
  [[nodiscard]] double value(std::size_t slice, StateIndex s, ActionIndex a) const {
    return values_[at(slice, s, a)];
  }
  std::uint64_t& visits(std::size_t slice, StateIndex s, ActionIndex a) {
    return visits_[at(slice, s, a)];
  }
  [[nodiscard]] std::uint64_t visits(std::size_t slice, StateIndex s, ActionIndex a) const {
    return visits_[at(slice, s, a)];
  }

  [[nodiscard]] double max_value(std::size_t slice, StateIndex s) const {
    double best = value(slice, s, 0);
    for (ActionIndex a = 1; a < actions_[s]; ++a) best = std::max(best, value(slice, s, a));
    return best;
  }

  /// Lowest-index maximiser; deterministic.
  [[nodiscard]] ActionIndex greedy(std::size_t slice, StateIndex s) const {
    ActionIndex best = 0;
    for (ActionIndex a = 1; a < actions_[s]; ++a)
      if (value(slice, s, a) > value(slice, s, best)) best = a;
    return best;
  }

  /// Maximiser with ties broken uniformly at random.
  ActionIndex greedy(std::size_t slice, StateIndex s, Rng& rng) const {
    const double best = max_value(slice, s);
    std::size_t ties = 0;
    for (ActionIndex a = 0; a < actions_[s]; ++a) ties += value(slice, s, a) == best;
    std::size_t pick = rng.below(ties);
    for (ActionIndex a = 0; a < actions_[s]; ++a)
      if (value(slice, s, a) == best && pick-- == 0) return a;
    return 0;
  }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  [[nodiscard]] std::size_t at(std::size_t slice, StateIndex s, ActionIndex a) const {
    return (slice * actions_.size() + s) * width_ + a;
  }

  std::vector<std::size_t> actions_;
  std::size_t slices_ = 1;
  std::size_t width_ = 0;
  std::vector<double> values_;
  std::vector<std::uint64_t> visits_;
};

}  // namespace timelimits
