#pragma once

#include <span>
#include <vector>

#include "pbdsim/common.hpp"
#include "pbdsim/shape/polar.hpp"

namespace pbdsim::shape {

/// One shape-matching region. Particles have uniform unit mass, so the rest
/// centroid is the plain mean of the rest positions.
struct ShapeCluster {
  std::vector<Index> member_indices;
  std::vector<Vec3> rest_positions;
  Vec3 rest_centroid = Vec3::Zero();
  double stiffness = 1.0;

  /// Builds a cluster from particle rest positions; computes the centroid.
  static ShapeCluster from_rest(std::vector<Index> members, std::span<const Vec3> rest, double stiffness);

  /// Mean of rest_positions, recomputed.
  Vec3 centroid_of_rest() const;
  /// Non-empty, no duplicate members, sizes agree, stiffness in [0,1].
  void validate(std::size_t particle_count) const;
};

/// Table-I style cluster and link parameters. Lengths are meters.
struct ClusterParams {
  double cluster_spacing = 0.005;
  double cluster_radius = 0.005;
  double cluster_stiffness = 0.002;
  double link_radius = 0.0025;
  double link_stiffness = 0.001;

  /// Throws ConfigError on non-positive lengths, stiffness outside [0,1] or
  /// cluster_radius < cluster_spacing / 2.
  void validate() const;
};

class CoverageError : public ConfigError {
 public:
  CoverageError(const std::string& what, std::size_t orphan) : ConfigError(what), orphan_(orphan) {}
  std::size_t orphan() const { return orphan_; }

 private:
  std::size_t orphan_;
};

/// Cluster centers sit on a regular grid of pitch `cluster_spacing` anchored
/// at the particle bounding-box minimum and extended until the box is
/// covered. A cluster holds every particle whose per-axis (Chebyshev)
/// distance to its center is <= cluster_radius; empty clusters are dropped.
/// Member indices are `index_offset + i`.
///
/// Only lengths and stiffness are checked up front; the radius/spacing rule is
/// enforced through the coverage check, so violating parameters surface as a
/// CoverageError naming the first orphan particle.
std::vector<ShapeCluster> build_clusters(std::span<const Vec3> particles, const ClusterParams& params,
                                         Index index_offset = 0);

/// Rigid best fit of a cluster to the current positions.
struct ClusterFit {
  RotationResult rotation;
  Vec3 centroid = Vec3::Zero();
  double residual = 0.0;  // sqrt(sum |g_i - p_i|^2)
};

/// Fits members (indices into `predicted`) whose rest offsets from the rest
/// centroid are `rest_offsets`. Shared by the public API and the solver kernels.
ClusterFit fit_cluster(std::span<const Index> members, std::span<const Vec3> rest_offsets,
                       std::span<const Vec3> predicted);

struct ShapeMatchResult {
  ClusterFit fit;
  std::vector<Vec3> goals;        // per member
  std::vector<Vec3> corrections;  // per member; zero for pinned members
};

/// Goal positions g_i = R (q_i - c0) + c and corrections k' (g_i - p_i), with
/// k' the stiffness corrected for `solver_iterations` passes.
ShapeMatchResult project_shape_matching(const ShapeCluster& cluster, std::span<const Vec3> predicted,
                                        std::span<const double> inv_mass, int solver_iterations = 1);

struct ClusterCorrections {
  std::span<const Index> members;
  std::span<const Vec3> corrections;
};

/// Per-particle arithmetic mean of the corrections of every cluster that
/// contains it. Particles in no cluster get a zero displacement.
std::vector<Vec3> blend_overlapping_corrections(std::span<const ClusterCorrections> clusters,
                                                std::size_t particle_count);

}  // namespace pbdsim::shape
