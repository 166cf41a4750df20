#pragma once

#include <cmath>
#include <span>

#include "timelimits/core/errors.hpp"

namespace timelimits {

/// Finite-horizon discounted return: sum over k of gamma^(k-1) r_k.
inline double discounted_return(std::span<const double> rewards, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in [0, 1]");
  double total = 0.0;
  double weight = 1.0;
  for (double r : rewards) {
    if (!std::isfinite(r)) throw InvalidInput("non-finite reward in return computation");
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

}  // namespace timelimits
