#include <omp.h>

#include <algorithm>

#include "kernel_ops.hpp"

namespace pbdsim::core::kernels::omp {

namespace {

using Signed = std::ptrdiff_t;

}  // namespace

void predict(std::span<const Vec3> positions, std::span<Vec3> velocities, std::span<Vec3> predicted,
             std::span<const double> inv_mass, const Vec3& gravity, double damping, double dt) {
  const Signed n = static_cast<Signed>(positions.size());
#pragma omp parallel for schedule(static)
  for (Signed i = 0; i < n; ++i)
    ops::predict_one(positions[i], velocities[i], predicted[i], inv_mass[i], gravity, damping, dt);
}

std::size_t project_clusters(const ClusterLayout& layout, std::span<Vec3> predicted, std::span<const double> inv_mass,
                             Workspace& ws) {
  const Signed clusters = static_cast<Signed>(layout.cluster_count());
  const Signed n = static_cast<Signed>(predicted.size());
  std::size_t bad = kNoParticle;
#pragma omp parallel
  {
    // Gather: every cluster fits against the pre-pass positions and writes
    // its own slots only.
#pragma omp for schedule(dynamic, 8)
    for (Signed c = 0; c < clusters; ++c) {
      const shape::ClusterFit f = ops::fit(layout, static_cast<std::size_t>(c), predicted);
      ws.cluster_residual[c] = f.residual;
      ws.cluster_degenerate[c] = f.rotation.degenerate() ? 1 : 0;
      for (std::size_t s = layout.offsets[c]; s < layout.offsets[c + 1]; ++s) {
        const Index m = layout.members[s];
        ws.slot_corr[s] = inv_mass[m] == 0.0
                              ? Vec3::Zero()
                              : ops::cluster_correction(f, layout.rest_offsets[s], predicted[m], layout.stiffness[c]);
      }
    }
    // Apply: each particle sums its slots in ascending order.
#pragma omp for schedule(static) reduction(min : bad)
    for (Signed i = 0; i < n; ++i) {
      const std::size_t begin = layout.particle_offsets[i], end = layout.particle_offsets[i + 1];
      if (begin == end || inv_mass[i] == 0.0) continue;
      Vec3 sum = Vec3::Zero();
      for (std::size_t k = begin; k < end; ++k) sum += ws.slot_corr[layout.particle_slots[k]];
      predicted[i] += sum / static_cast<double>(end - begin);
      if (!all_finite(predicted[i])) bad = std::min(bad, static_cast<std::size_t>(i));
    }
  }
  return bad;
}

std::size_t project_links(const LinkLayout& layout, std::span<Vec3> predicted, std::span<const double> inv_mass,
                          Workspace& ws) {
  const Signed links = static_cast<Signed>(layout.link_count());
  const Signed n = static_cast<Signed>(predicted.size());
  std::size_t bad = kNoParticle;
#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (Signed l = 0; l < links; ++l) {
      const Index a = layout.a[l], b = layout.b[l];
      Vec3 ca, cb;
      if (!ops::link_correction(predicted[a], predicted[b], inv_mass[a], inv_mass[b], layout.rest[l],
                                layout.stiffness[l], ca, cb)) {
        ws.end_corr[2 * l].setZero();
        ws.end_corr[2 * l + 1].setZero();
        continue;
      }
      ws.end_corr[2 * l] = ca;
      ws.end_corr[2 * l + 1] = cb;
    }
#pragma omp for schedule(static) reduction(min : bad)
    for (Signed i = 0; i < n; ++i) {
      const std::size_t begin = layout.particle_offsets[i], end = layout.particle_offsets[i + 1];
      if (begin == end || inv_mass[i] == 0.0) continue;
      Vec3 sum = Vec3::Zero();
      for (std::size_t k = begin; k < end; ++k) sum += ws.end_corr[layout.particle_ends[k]];
      predicted[i] += sum / static_cast<double>(end - begin);
      if (!all_finite(predicted[i])) bad = std::min(bad, static_cast<std::size_t>(i));
    }
  }
  return bad;
}

ContactCounts project_contacts(const ContactParams& contact, std::span<const Vec3> positions,
                               std::span<Vec3> predicted, std::span<const double> inv_mass) {
  const Signed n = static_cast<Signed>(predicted.size());
  std::size_t contacts = 0, fallbacks = 0;
#pragma omp parallel for schedule(static) reduction(+ : contacts, fallbacks)
  for (Signed i = 0; i < n; ++i) {
    if (inv_mass[i] == 0.0) continue;
    const int r = ops::contact_one(contact, positions[i], predicted[i]);
    if (r > 0) ++contacts;
    if (r == 2) ++fallbacks;
  }
  return {contacts, fallbacks};
}

void link_residuals(const LinkLayout& layout, std::span<const Vec3> predicted, std::span<double> out) {
  const Signed links = static_cast<Signed>(layout.link_count());
#pragma omp parallel for schedule(static)
  for (Signed l = 0; l < links; ++l)
    out[l] = ops::link_residual(predicted[layout.a[l]], predicted[layout.b[l]], layout.rest[l]);
}

Extrema finalize(std::span<Vec3> positions, std::span<Vec3> velocities, std::span<const Vec3> predicted,
                 double dt) {
  const Signed n = static_cast<Signed>(positions.size());
  double max_delta = 0.0, max_speed = 0.0;
#pragma omp parallel for schedule(static) reduction(max : max_delta, max_speed)
  for (Signed i = 0; i < n; ++i) {
    Extrema local;
    ops::finalize_one(positions[i], velocities[i], predicted[i], dt, local);
    max_delta = std::max(max_delta, local.max_delta);
    max_speed = std::max(max_speed, local.max_speed);
  }
  return {max_delta, max_speed};
}

std::size_t first_non_finite(std::span<const Vec3> values) {
  const Signed n = static_cast<Signed>(values.size());
  std::size_t bad = kNoParticle;
#pragma omp parallel for schedule(static) reduction(min : bad)
  for (Signed i = 0; i < n; ++i)
    if (!all_finite(values[i])) bad = std::min(bad, static_cast<std::size_t>(i));
  return bad;
}

}  // namespace pbdsim::core::kernels::omp
