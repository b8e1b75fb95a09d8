#pragma once

// Constraint-projection kernels in two flavours with identical signatures:
// `serial` is the straightforward scatter-accumulate reference, `omp` runs the
// same arithmetic in a gather-then-apply layout under OpenMP. Both add
// per-particle contributions in ascending constraint order, so their results
// are bit-identical for any thread count.

#include <limits>
#include <span>
#include <vector>

#include "pbdsim/catheter/capsule.hpp"
#include "pbdsim/common.hpp"

namespace pbdsim::core {

inline constexpr std::size_t kNoParticle = std::numeric_limits<std::size_t>::max();

/// Clusters flattened into slots (one slot per cluster member).
struct ClusterLayout {
  std::vector<std::size_t> offsets;  // cluster c owns slots [offsets[c], offsets[c+1])
  std::vector<Index> members;
  std::vector<Vec3> rest_offsets;     // q - c0 per slot
  std::vector<double> stiffness;      // per cluster, per-pass (iteration corrected)
  std::vector<std::size_t> particle_offsets;  // particle i owns [po[i], po[i+1]) of particle_slots
  std::vector<std::uint32_t> particle_slots;  // ascending

  std::size_t cluster_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

/// Links with a per-particle incidence list of link ends (2 * link + side).
struct LinkLayout {
  std::vector<Index> a, b;
  std::vector<double> rest;
  std::vector<double> stiffness;  // per-pass
  std::vector<std::size_t> particle_offsets;
  std::vector<std::uint32_t> particle_ends;  // ascending

  std::size_t link_count() const { return a.size(); }
};

struct ContactParams {
  catheter::CapsulePose pose;
  Vec3 fallback = Vec3::UnitY();
  double margin = 0.0;
  double friction = 0.0;            // 0 disables the tangential correction
  Vec3 catheter_shift = Vec3::Zero();  // catheter displacement over the substep
};

struct ContactCounts {
  std::size_t contacts = 0;
  std::size_t axis_fallbacks = 0;
};

struct Workspace {
  std::vector<Vec3> accum;        // serial scatter target
  std::vector<Vec3> slot_corr;    // omp per-slot corrections
  std::vector<Vec3> end_corr;     // omp per-link-end corrections
  std::vector<double> cluster_residual;
  std::vector<unsigned char> cluster_degenerate;
  std::vector<double> link_residual;

  void resize(std::size_t particles, const ClusterLayout& clusters, const LinkLayout& links);
};

struct Extrema {
  double max_delta = 0.0;
  double max_speed = 0.0;
};

namespace kernels::serial {
void predict(std::span<const Vec3> positions, std::span<Vec3> velocities, std::span<Vec3> predicted,
             std::span<const double> inv_mass, const Vec3& gravity, double damping, double dt);
/// Returns the first particle left non-finite, or kNoParticle.
std::size_t project_clusters(const ClusterLayout& layout, std::span<Vec3> predicted,
                             std::span<const double> inv_mass, Workspace& ws);
std::size_t project_links(const LinkLayout& layout, std::span<Vec3> predicted,
                          std::span<const double> inv_mass, Workspace& ws);
ContactCounts project_contacts(const ContactParams& contact, std::span<const Vec3> positions,
                               std::span<Vec3> predicted, std::span<const double> inv_mass);
void link_residuals(const LinkLayout& layout, std::span<const Vec3> predicted, std::span<double> out);
Extrema finalize(std::span<Vec3> positions, std::span<Vec3> velocities, std::span<const Vec3> predicted,
                 double dt);
std::size_t first_non_finite(std::span<const Vec3> values);
}  // namespace kernels::serial

namespace kernels::omp {
void predict(std::span<const Vec3> positions, std::span<Vec3> velocities, std::span<Vec3> predicted,
             std::span<const double> inv_mass, const Vec3& gravity, double damping, double dt);
/// Returns the first particle left non-finite, or kNoParticle.
std::size_t project_clusters(const ClusterLayout& layout, std::span<Vec3> predicted,
                             std::span<const double> inv_mass, Workspace& ws);
std::size_t project_links(const LinkLayout& layout, std::span<Vec3> predicted,
                          std::span<const double> inv_mass, Workspace& ws);
ContactCounts project_contacts(const ContactParams& contact, std::span<const Vec3> positions,
                               std::span<Vec3> predicted, std::span<const double> inv_mass);
void link_residuals(const LinkLayout& layout, std::span<const Vec3> predicted, std::span<double> out);
Extrema finalize(std::span<Vec3> positions, std::span<Vec3> velocities, std::span<const Vec3> predicted,
                 double dt);
std::size_t first_non_finite(std::span<const Vec3> values);
}  // namespace kernels::omp

}  // namespace pbdsim::core
