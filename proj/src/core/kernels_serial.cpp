#include <algorithm>

#include "kernel_ops.hpp"

namespace pbdsim::core {

void Workspace::resize(std::size_t particles, const ClusterLayout& clusters, const LinkLayout& links) {
  accum.assign(particles, Vec3::Zero());
  slot_corr.assign(clusters.members.size(), Vec3::Zero());
  end_corr.assign(2 * links.link_count(), Vec3::Zero());
  cluster_residual.assign(clusters.cluster_count(), 0.0);
  cluster_degenerate.assign(clusters.cluster_count(), 0);
  link_residual.assign(links.link_count(), 0.0);
}

namespace kernels::serial {

void predict(std::span<const Vec3> positions, std::span<Vec3> velocities, std::span<Vec3> predicted,
             std::span<const double> inv_mass, const Vec3& gravity, double damping, double dt) {
  for (std::size_t i = 0; i < positions.size(); ++i)
    ops::predict_one(positions[i], velocities[i], predicted[i], inv_mass[i], gravity, damping, dt);
}

std::size_t project_clusters(const ClusterLayout& layout, std::span<Vec3> predicted, std::span<const double> inv_mass,
                             Workspace& ws) {
  const std::size_t n = predicted.size();
  std::fill(ws.accum.begin(), ws.accum.end(), Vec3::Zero());
  for (std::size_t c = 0; c < layout.cluster_count(); ++c) {
    const shape::ClusterFit f = ops::fit(layout, c, predicted);
    ws.cluster_residual[c] = f.residual;
    ws.cluster_degenerate[c] = f.rotation.degenerate() ? 1 : 0;
    for (std::size_t s = layout.offsets[c]; s < layout.offsets[c + 1]; ++s) {
      const Index m = layout.members[s];
      if (inv_mass[m] == 0.0) continue;
      ws.accum[m] += ops::cluster_correction(f, layout.rest_offsets[s], predicted[m], layout.stiffness[c]);
    }
  }
  std::size_t bad = kNoParticle;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t count = layout.particle_offsets[i + 1] - layout.particle_offsets[i];
    if (count == 0 || inv_mass[i] == 0.0) continue;
    predicted[i] += ws.accum[i] / static_cast<double>(count);
    if (bad == kNoParticle && !all_finite(predicted[i])) bad = i;
  }
  return bad;
}

std::size_t project_links(const LinkLayout& layout, std::span<Vec3> predicted, std::span<const double> inv_mass,
                          Workspace& ws) {
  std::fill(ws.accum.begin(), ws.accum.end(), Vec3::Zero());
  for (std::size_t l = 0; l < layout.link_count(); ++l) {
    const Index a = layout.a[l], b = layout.b[l];
    Vec3 ca, cb;
    if (!ops::link_correction(predicted[a], predicted[b], inv_mass[a], inv_mass[b], layout.rest[l],
                              layout.stiffness[l], ca, cb))
      continue;
    ws.accum[a] += ca;
    ws.accum[b] += cb;
  }
  std::size_t bad = kNoParticle;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const std::size_t count = layout.particle_offsets[i + 1] - layout.particle_offsets[i];
    if (count == 0 || inv_mass[i] == 0.0) continue;
    predicted[i] += ws.accum[i] / static_cast<double>(count);
    if (bad == kNoParticle && !all_finite(predicted[i])) bad = i;
  }
  return bad;
}

ContactCounts project_contacts(const ContactParams& contact, std::span<const Vec3> positions,
                               std::span<Vec3> predicted, std::span<const double> inv_mass) {
  ContactCounts counts;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (inv_mass[i] == 0.0) continue;
    const int r = ops::contact_one(contact, positions[i], predicted[i]);
    if (r > 0) ++counts.contacts;
    if (r == 2) ++counts.axis_fallbacks;
  }
  return counts;
}

void link_residuals(const LinkLayout& layout, std::span<const Vec3> predicted, std::span<double> out) {
  for (std::size_t l = 0; l < layout.link_count(); ++l)
    out[l] = ops::link_residual(predicted[layout.a[l]], predicted[layout.b[l]], layout.rest[l]);
}

Extrema finalize(std::span<Vec3> positions, std::span<Vec3> velocities, std::span<const Vec3> predicted,
                 double dt) {
  Extrema ex;
  for (std::size_t i = 0; i < positions.size(); ++i) ops::finalize_one(positions[i], velocities[i], predicted[i], dt, ex);
  return ex;
}

std::size_t first_non_finite(std::span<const Vec3> values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!all_finite(values[i])) return i;
  return kNoParticle;
}

}  // namespace kernels::serial
}  // namespace pbdsim::core
