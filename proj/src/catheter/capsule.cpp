#include "pbdsim/catheter/capsule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pbdsim::catheter {

void CatheterRig::validate() const {
  if (!(radius > 0.0)) throw ConfigError("catheter radius must be > 0");
  if (!(std::abs(direction.norm() - 1.0) <= 1e-9)) throw ConfigError("catheter direction must be a unit vector");
  if (!(speed >= 0.0)) throw ConfigError("catheter speed must be >= 0");
  if (!(shaft_length > 0.0)) throw ConfigError("catheter shaft_length must be > 0");
  if (!all_finite(start_tip)) throw ConfigError("catheter start_tip must be finite");
}

CapsulePose pose_at(const CatheterRig& rig, double t) {
  CapsulePose pose;
  pose.tip = rig.start_tip + rig.direction * (rig.speed * t);
  pose.tail = pose.tip - rig.direction * rig.shaft_length;
  pose.radius = rig.radius;
  return pose;
}

Vec3 closest_point_on_axis(const CapsulePose& pose, const Vec3& p) {
  const Vec3 seg = pose.tip - pose.tail;
  const double len2 = seg.squaredNorm();
  double t = len2 > 0.0 ? (p - pose.tail).dot(seg) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return pose.tail + t * seg;
}

Vec3 fallback_perpendicular(const Vec3& axis) {
  const Vec3 a = axis.normalized();
  int least = 0;
  for (int d = 1; d < 3; ++d)
    if (std::abs(a[d]) < std::abs(a[least])) least = d;
  return a.cross(Vec3::Unit(least)).normalized();
}

ContactProjection project_collisions(const CapsulePose& pose, std::span<const Vec3> predicted,
                                     std::span<const double> inv_mass, double margin) {
  ContactProjection out;
  out.corrections.assign(predicted.size(), Vec3::Zero());
  const Vec3 axis = (pose.tip - pose.tail).normalized();
  const Vec3 perp = fallback_perpendicular(axis);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (inv_mass[i] == 0.0) continue;
    if (auto hit = project_particle(pose, perp, predicted[i], margin)) {
      out.corrections[i] = hit->corrected - predicted[i];
      ++out.contacts;
      if (hit->on_axis) ++out.axis_fallbacks;
    }
  }
  return out;
}

double max_penetration(const CapsulePose& pose, std::span<const Vec3> positions, std::span<const double> inv_mass,
                       double margin) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (inv_mass[i] == 0.0) continue;
    const double d = (positions[i] - closest_point_on_axis(pose, positions[i])).norm();
    worst = std::max(worst, pose.radius + margin - d);
  }
  return worst;
}

}  // namespace pbdsim::catheter
