#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pbdsim/common.hpp"

namespace pbdsim::catheter {

/// Kinematic rigid catheter on a straight constant-speed trajectory.
struct CatheterRig {
  double radius = 0.00125;
  Vec3 start_tip = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  double speed = 0.0005;
  double shaft_length = 0.1;

  void validate() const;
};

/// Capsule: segment [tail, tip] swept by a sphere of `radius`.
struct CapsulePose {
  Vec3 tip = Vec3::Zero();
  Vec3 tail = -Vec3::UnitX();
  double radius = 0.00125;
};

CapsulePose pose_at(const CatheterRig& rig, double t);

/// Closest point to `p` on the segment [tail, tip].
Vec3 closest_point_on_axis(const CapsulePose& pose, const Vec3& p);

/// Fixed unit vector perpendicular to `axis`, used when the radial direction
/// is undefined. Deterministic for a given axis.
Vec3 fallback_perpendicular(const Vec3& axis);

struct ParticleContact {
  Vec3 corrected;
  bool on_axis = false;
};

/// Push-out projection for one particle; nullopt when it does not touch the
/// capsule inflated by `margin`.
inline std::optional<ParticleContact> project_particle(const CapsulePose& pose, const Vec3& fallback, const Vec3& p,
                                                       double margin) {
  const Vec3 seg = pose.tip - pose.tail;
  const double len2 = seg.squaredNorm();
  double t = len2 > 0.0 ? (p - pose.tail).dot(seg) / len2 : 0.0;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  const Vec3 closest = pose.tail + t * seg;
  const Vec3 d = p - closest;
  const double reach = pose.radius + margin;
  const double dist2 = d.squaredNorm();
  if (dist2 >= reach * reach) return std::nullopt;
  const double dist = std::sqrt(dist2);
  // Rounding in the axial projection leaves residuals of order eps * |p - tail|.
  if (dist > 1e-12 * ((p - pose.tail).norm() + reach)) return ParticleContact{closest + d * (reach / dist), false};
  return ParticleContact{closest + fallback * reach, true};
}

struct ContactProjection {
  std::vector<Vec3> corrections;  // per particle, zero when untouched
  std::size_t contacts = 0;
  std::size_t axis_fallbacks = 0;
};

/// Pushes every free particle closer than radius + margin to the capsule axis
/// out radially to exactly radius + margin. Pinned particles are untouched.
ContactProjection project_collisions(const CapsulePose& pose, std::span<const Vec3> predicted,
                                     std::span<const double> inv_mass, double margin = 0.0);

/// Largest (radius + margin - distance) over free particles; <= 0 means no
/// penetration. Returns -inf when there are no free particles.
double max_penetration(const CapsulePose& pose, std::span<const Vec3> positions, std::span<const double> inv_mass,
                       double margin = 0.0);

}  // namespace pbdsim::catheter
