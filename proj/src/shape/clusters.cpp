#include "pbdsim/shape/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <array>

#include "pbdsim/core/stiffness.hpp"
#include "pbdsim/io/csv.hpp"

namespace pbdsim::shape {

ShapeCluster ShapeCluster::from_rest(std::vector<Index> members, std::span<const Vec3> rest, double stiffness) {
  ShapeCluster c;
  c.member_indices = std::move(members);
  c.rest_positions.reserve(c.member_indices.size());
  for (Index m : c.member_indices) c.rest_positions.push_back(rest[m]);
  c.rest_centroid = c.centroid_of_rest();
  c.stiffness = stiffness;
  return c;
}

Vec3 ShapeCluster::centroid_of_rest() const {
  Vec3 sum = Vec3::Zero();
  for (const auto& q : rest_positions) sum += q;
  return rest_positions.empty() ? sum : Vec3(sum / static_cast<double>(rest_positions.size()));
}

void ShapeCluster::validate(std::size_t particle_count) const {
  if (member_indices.empty()) throw ConfigError("shape cluster has no members");
  if (rest_positions.size() != member_indices.size())
    throw ConfigError("shape cluster rest_positions/member_indices size mismatch");
  if (!(stiffness >= 0.0 && stiffness <= 1.0)) throw ConfigError("shape cluster stiffness outside [0,1]");
  std::unordered_set<Index> seen;
  for (Index m : member_indices) {
    if (m >= particle_count)
      throw ConfigError("shape cluster member " + std::to_string(m) + " out of range (" +
                        std::to_string(particle_count) + " particles)");
    if (!seen.insert(m).second) throw ConfigError("shape cluster lists particle " + std::to_string(m) + " twice");
  }
}

void ClusterParams::validate() const {
  if (!(cluster_spacing > 0.0)) throw ConfigError("cluster_spacing must be > 0");
  if (!(cluster_radius > 0.0)) throw ConfigError("cluster_radius must be > 0");
  if (!(link_radius > 0.0)) throw ConfigError("link_radius must be > 0");
  if (!(cluster_stiffness >= 0.0 && cluster_stiffness <= 1.0)) throw ConfigError("cluster_stiffness outside [0,1]");
  if (!(link_stiffness >= 0.0 && link_stiffness <= 1.0)) throw ConfigError("link_stiffness outside [0,1]");
  if (cluster_radius < 0.5 * cluster_spacing)
    throw ConfigError("cluster_radius must be at least half of cluster_spacing");
}

namespace {

struct AxisGrid {
  double origin = 0.0;
  int count = 1;
};

}  // namespace

std::vector<ShapeCluster> build_clusters(std::span<const Vec3> particles, const ClusterParams& params,
                                         Index index_offset) {
  if (particles.empty()) throw ConfigError("build_clusters: no particles");
  const double spacing = params.cluster_spacing;
  const double radius = params.cluster_radius;
  if (!(spacing > 0.0) || !(radius > 0.0)) throw ConfigError("build_clusters: spacing and radius must be > 0");
  if (!(params.cluster_stiffness >= 0.0 && params.cluster_stiffness <= 1.0))
    throw ConfigError("build_clusters: cluster_stiffness outside [0,1]");

  Vec3 lo = particles[0], hi = particles[0];
  for (const auto& p : particles) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double eps = 1e-9 * std::max(spacing, radius);

  std::array<AxisGrid, 3> axes;
  for (int d = 0; d < 3; ++d) {
    const double extent = hi[d] - lo[d];
    axes[d].origin = lo[d];
    const double needed = extent - radius;
    axes[d].count = needed > eps ? static_cast<int>(std::ceil(needed / spacing - 1e-9)) + 1 : 1;
  }
  const std::size_t nx = axes[0].count, ny = axes[1].count, nz = axes[2].count;
  std::vector<std::vector<Index>> buckets(nx * ny * nz);
  std::vector<int> membership(particles.size(), 0);

  auto center = [&](int d, int k) { return axes[d].origin + spacing * k; };

  for (std::size_t i = 0; i < particles.size(); ++i) {
    std::array<int, 3> kmin{}, kmax{};
    bool any = true;
    for (int d = 0; d < 3; ++d) {
      const double rel = particles[i][d] - axes[d].origin;
      int a = std::max(0, static_cast<int>(std::floor((rel - radius) / spacing)) - 1);
      int b = std::min(axes[d].count - 1, static_cast<int>(std::ceil((rel + radius) / spacing)) + 1);
      while (a <= b && std::abs(particles[i][d] - center(d, a)) > radius + eps) ++a;
      while (b >= a && std::abs(particles[i][d] - center(d, b)) > radius + eps) --b;
      kmin[d] = a;
      kmax[d] = b;
      if (a > b) any = false;
    }
    if (!any) continue;
    for (int x = kmin[0]; x <= kmax[0]; ++x)
      for (int y = kmin[1]; y <= kmax[1]; ++y)
        for (int z = kmin[2]; z <= kmax[2]; ++z) {
          buckets[(static_cast<std::size_t>(x) * ny + y) * nz + z].push_back(static_cast<Index>(i));
          ++membership[i];
        }
  }

  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (membership[i] == 0)
      throw CoverageError("particle " + std::to_string(index_offset + i) +
                              " lies in no shape-matching cluster (cluster_radius " + io::format_double(radius) +
                              " vs cluster_spacing " + io::format_double(spacing) + ")",
                          index_offset + i);
  }

  std::vector<ShapeCluster> clusters;
  for (auto& members : buckets) {
    if (members.empty()) continue;
    ShapeCluster c;
    c.rest_positions.reserve(members.size());
    for (Index m : members) c.rest_positions.push_back(particles[m]);
    c.rest_centroid = c.centroid_of_rest();
    c.member_indices.reserve(members.size());
    for (Index m : members) c.member_indices.push_back(m + index_offset);
    c.stiffness = params.cluster_stiffness;
    clusters.push_back(std::move(c));
  }
  return clusters;
}

ClusterFit fit_cluster(std::span<const Index> members, std::span<const Vec3> rest_offsets,
                       std::span<const Vec3> predicted) {
  ClusterFit fit;
  const std::size_t n = members.size();
  Vec3 c = Vec3::Zero();
  for (std::size_t s = 0; s < n; ++s) c += predicted[members[s]];
  c /= static_cast<double>(n);
  Mat3 a = Mat3::Zero();
  for (std::size_t s = 0; s < n; ++s) a.noalias() += (predicted[members[s]] - c) * rest_offsets[s].transpose();
  fit.rotation = extract_rotation(a);
  fit.centroid = c;
  double r2 = 0.0;
  const Mat3& r = fit.rotation.rotation;
  for (std::size_t s = 0; s < n; ++s) r2 += (r * rest_offsets[s] + c - predicted[members[s]]).squaredNorm();
  fit.residual = std::sqrt(r2);
  return fit;
}

ShapeMatchResult project_shape_matching(const ShapeCluster& cluster, std::span<const Vec3> predicted,
                                        std::span<const double> inv_mass, int solver_iterations) {
  std::vector<Vec3> offsets;
  offsets.reserve(cluster.rest_positions.size());
  for (const auto& q : cluster.rest_positions) offsets.push_back(q - cluster.rest_centroid);

  ShapeMatchResult out;
  out.fit = fit_cluster(cluster.member_indices, offsets, predicted);
  const double k = core::apply_stiffness_iteration_correction(cluster.stiffness, solver_iterations);
  const Mat3& r = out.fit.rotation.rotation;
  out.goals.reserve(offsets.size());
  out.corrections.reserve(offsets.size());
  for (std::size_t s = 0; s < offsets.size(); ++s) {
    const Index m = cluster.member_indices[s];
    const Vec3 g = r * offsets[s] + out.fit.centroid;
    out.goals.push_back(g);
    out.corrections.push_back(inv_mass[m] > 0.0 ? Vec3(k * (g - predicted[m])) : Vec3::Zero());
  }
  return out;
}

std::vector<Vec3> blend_overlapping_corrections(std::span<const ClusterCorrections> clusters,
                                                std::size_t particle_count) {
  std::vector<Vec3> sum(particle_count, Vec3::Zero());
  std::vector<int> count(particle_count, 0);
  for (const auto& c : clusters) {
    for (std::size_t s = 0; s < c.members.size(); ++s) {
      sum[c.members[s]] += c.corrections[s];
      ++count[c.members[s]];
    }
  }
  for (std::size_t i = 0; i < particle_count; ++i)
    if (count[i] > 0) sum[i] /= static_cast<double>(count[i]);
  return sum;
}

}  // namespace pbdsim::shape
