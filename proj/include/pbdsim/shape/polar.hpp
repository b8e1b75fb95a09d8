#pragma once

#include "pbdsim/common.hpp"

namespace pbdsim::shape {

enum class RotationMethod {
  newton,              // scaled Newton polar iteration converged
  newton_reflection,   // Newton converged to an improper factor, reflection removed
  svd,                 // near-singular or slow convergence, SVD with det correction
  identity_fallback,   // rank < 2, rotation undetermined
};

struct RotationResult {
  Mat3 rotation = Mat3::Identity();
  RotationMethod method = RotationMethod::newton;
  int iterations = 0;

  bool degenerate() const { return method == RotationMethod::identity_fallback; }
};

struct PolarOptions {
  double tolerance = 1e-9;
  int max_iterations = 64;
};

/// Closest proper rotation to `moment` in the Frobenius sense (the rotational
/// factor of its polar decomposition, with the smallest principal direction
/// flipped when det(moment) < 0). Rank-deficient input below rank 2 yields
/// the identity.
RotationResult extract_rotation(const Mat3& moment, const PolarOptions& options = {});

}  // namespace pbdsim::shape
