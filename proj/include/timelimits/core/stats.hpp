#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace timelimits {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

/// Sample mean and standard error (sample standard deviation / sqrt(n));
/// the standard error of a single sample is 0.
inline MeanStderr mean_stderr(std::span<const double> xs) {
  MeanStderr out;
  out.n = xs.size();
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
                  std::sqrt(static_cast<double>(xs.size()));
  }
  return out;
}

}  // namespace timelimits
