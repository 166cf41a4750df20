#pragma once

#include <cmath>
#include <cstdint>

#include "timelimits/core/errors.hpp"

namespace timelimits {

/// Per-pair decaying step size alpha0 / N^omega plus a constant exploration rate.
struct LearningSchedule {
  double alpha0 = 1.0;
  double omega = 0.8;
  double epsilon = 1.0;

  void validate() const {
    if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw InvalidInput("alpha0 must lie in (0, 1]");
    if (!(omega >= 0.0 && omega <= 1.0)) throw InvalidInput("omega must lie in [0, 1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidInput("epsilon must lie in [0, 1]");
  }

  /// Step size for the visit-th update of a pair (visit >= 1).
  [[nodiscard]] double alpha(std::uint64_t visit) const {
    return alpha0 / std::pow(static_cast<double>(visit), omega);
  }
};

}  // namespace timelimits
