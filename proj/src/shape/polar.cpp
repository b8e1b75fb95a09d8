#include "pbdsim/shape/polar.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>

namespace pbdsim::shape {

namespace {

constexpr double kSingularDet = 1e-12;  // |det| / ||A||^3 below this goes to SVD
constexpr double kRankTwo = 1e-9;       // sigma2 / sigma1 below this is rank < 2

RotationResult from_svd(const Mat3& a, int iterations) {
  RotationResult out;
  out.iterations = iterations;
  Eigen::JacobiSVD<Mat3> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sigma = svd.singularValues();
  if (!(sigma(0) > 0.0) || sigma(1) <= kRankTwo * sigma(0)) {
    out.method = RotationMethod::identity_fallback;
    return out;
  }
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Vec3 d(1.0, 1.0, (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
  out.rotation = u * d.asDiagonal() * v.transpose();
  out.method = RotationMethod::svd;
  return out;
}

}  // namespace

RotationResult extract_rotation(const Mat3& a, const PolarOptions& options) {
  const double norm = a.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    RotationResult out;
    out.method = RotationMethod::identity_fallback;
    return out;
  }
  const double det = a.determinant();
  if (std::abs(det) <= kSingularDet * norm * norm * norm) return from_svd(a, 0);

  // Scaled Newton iteration X <- (g X + X^-T / g) / 2 with Frobenius scaling.
  Mat3 x = a / norm;
  int it = 0;
  bool converged = false;
  while (it < options.max_iterations) {
    ++it;
    const Mat3 inv = x.inverse();
    const double g = std::sqrt(inv.norm() / x.norm());
    const Mat3 next = 0.5 * (g * x + inv.transpose() / g);
    const double change = (next - x).norm();
    x = next;
    if (change <= options.tolerance * x.norm()) {
      converged = true;
      break;
    }
  }
  if (!converged || !x.allFinite()) return from_svd(a, it);

  RotationResult out;
  out.iterations = it;
  if (det > 0.0) {
    out.rotation = x;
    out.method = RotationMethod::newton;
    return out;
  }

  // x is the orthogonal polar factor with det -1. With A = X H, the nearest
  // rotation flips the eigenvector of H with the smallest eigenvalue.
  const Mat3 h = x.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (h + h.transpose()));
  const Vec3 v = eig.eigenvectors().col(0);
  out.rotation = x * (Mat3::Identity() - 2.0 * v * v.transpose());
  out.method = RotationMethod::newton_reflection;
  return out;
}

}  // namespace pbdsim::shape
