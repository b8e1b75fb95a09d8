#pragma once

#include <cmath>

namespace pbdsim::core {

/// Per-pass stiffness k' such that `iterations` passes of k' compound to a
/// total correction of k: 1 - (1 - k')^n = k. Domain: k in [0,1], n >= 1.
inline double apply_stiffness_iteration_correction(double k, int iterations) {
  if (k >= 1.0) return 1.0;
  if (k <= 0.0) return 0.0;
  if (iterations <= 1) return k;
  return 1.0 - std::pow(1.0 - k, 1.0 / static_cast<double>(iterations));
}

}  // namespace pbdsim::core
