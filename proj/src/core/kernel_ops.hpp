#pragma once

// Per-element arithmetic shared by the serial and OpenMP kernels. Keeping a
// single definition is what makes the two flavours bit-identical.

#include <cmath>

#include "pbdsim/core/kernels.hpp"
#include "pbdsim/shape/clusters.hpp"

namespace pbdsim::core::ops {

inline void predict_one(const Vec3& pos, Vec3& vel, Vec3& pred, double w, const Vec3& gravity, double damping,
                        double dt) {
  if (w == 0.0) {
    vel.setZero();
    pred = pos;
    return;
  }
  vel += gravity * dt;
  vel *= (1.0 - damping);
  pred = pos + vel * dt;
}

inline shape::ClusterFit fit(const ClusterLayout& layout, std::size_t c, std::span<const Vec3> predicted) {
  const std::size_t begin = layout.offsets[c];
  const std::size_t n = layout.offsets[c + 1] - begin;
  return shape::fit_cluster(std::span<const Index>(layout.members.data() + begin, n),
                            std::span<const Vec3>(layout.rest_offsets.data() + begin, n), predicted);
}

inline Vec3 cluster_correction(const shape::ClusterFit& f, const Vec3& rest_offset, const Vec3& p, double k) {
  return k * (f.rotation.rotation * rest_offset + f.centroid - p);
}

/// Corrections for both ends; returns false when the link is inactive.
inline bool link_correction(const Vec3& pa, const Vec3& pb, double wa, double wb, double rest, double k, Vec3& ca,
                            Vec3& cb) {
  const double wsum = wa + wb;
  if (wsum == 0.0) return false;
  const Vec3 d = pb - pa;
  const double len = d.norm();
  if (!(len > 0.0)) return false;
  const double c = len - rest;
  const Vec3 n = d / len;
  ca = (k * (wa / wsum) * c) * n;
  cb = (-k * (wb / wsum) * c) * n;
  return true;
}

inline double link_residual(const Vec3& pa, const Vec3& pb, double rest) { return std::abs((pb - pa).norm() - rest); }

/// Returns 0 (no contact), 1 (contact) or 2 (contact on the axis).
inline int contact_one(const ContactParams& cp, const Vec3& x_prev, Vec3& pred) {
  auto hit = catheter::project_particle(cp.pose, cp.fallback, pred, cp.margin);
  if (!hit) return 0;
  Vec3 q = hit->corrected;
  if (cp.friction > 0.0) {
    const Vec3 closest = catheter::closest_point_on_axis(cp.pose, q);
    const double reach = cp.pose.radius + cp.margin;
    const Vec3 n = (q - closest) / reach;
    const double pen = (q - pred).norm();
    const Vec3 rel = (q - x_prev) - cp.catheter_shift;
    const Vec3 t = rel - rel.dot(n) * n;
    const double tl = t.norm();
    if (tl > 0.0) q -= (tl < cp.friction * pen) ? t : Vec3(t * (cp.friction * pen / tl));
  }
  pred = q;
  return hit->on_axis ? 2 : 1;
}

inline void finalize_one(Vec3& pos, Vec3& vel, const Vec3& pred, double dt, Extrema& ex) {
  const Vec3 delta = pred - pos;
  vel = delta / dt;
  pos = pred;
  const double dn = delta.norm();
  if (dn > ex.max_delta) ex.max_delta = dn;
  const double sp = vel.norm();
  if (sp > ex.max_speed) ex.max_speed = sp;
}

}  // namespace pbdsim::core::ops
