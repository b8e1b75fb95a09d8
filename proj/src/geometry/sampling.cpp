#include "pbdsim/geometry/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "pbdsim/io/csv.hpp"

namespace pbdsim::geometry {

namespace {

struct Point2 {
  double u, v;
};

// Exactly antisymmetric: edge(a, b) == -edge(b, a) in floating point.
double edge(const Point2& a, const Point2& b) { return a.u * b.v - a.v * b.u; }

// Ties on an edge go to exactly one of the two triangles sharing it.
bool owns_edge(const Point2& a, const Point2& b) {
  const double du = b.u - a.u, dv = b.v - a.v;
  return dv < 0.0 || (dv == 0.0 && du > 0.0);
}

// Hit coordinate along `axis` of the ray through (p_b, p_c), if the
// triangle's projection contains it.
std::optional<double> ray_hit(const Vec3& v0, const Vec3& v1, const Vec3& v2, double pb, double pc, int axis) {
  const int b = (axis + 1) % 3, c = (axis + 2) % 3;
  Point2 q[3] = {{v0[b] - pb, v0[c] - pc}, {v1[b] - pb, v1[c] - pc}, {v2[b] - pb, v2[c] - pc}};
  double depth[3] = {v0[axis], v1[axis], v2[axis]};
  double e0 = edge(q[1], q[2]), e1 = edge(q[2], q[0]), e2 = edge(q[0], q[1]);
  const double area = e0 + e1 + e2;
  if (area == 0.0) return std::nullopt;
  if (area < 0.0) {
    std::swap(q[1], q[2]);
    std::swap(depth[1], depth[2]);
    e0 = edge(q[1], q[2]);
    e1 = edge(q[2], q[0]);
    e2 = edge(q[0], q[1]);
  }
  const double es[3] = {e0, e1, e2};
  for (int k = 0; k < 3; ++k) {
    const Point2& a = q[(k + 1) % 3];
    const Point2& d = q[(k + 2) % 3];
    if (es[k] < 0.0 || (es[k] == 0.0 && !owns_edge(a, d))) return std::nullopt;
  }
  const double sum = e0 + e1 + e2;
  return (e0 * depth[0] + e1 * depth[1] + e2 * depth[2]) / sum;
}

}  // namespace

std::vector<double> grid_axis(double min, double max, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ConfigError("particle_spacing must be > 0");
  const double ext = max - min;
  std::vector<double> out;
  if (!(ext > 0.0)) return out;
  const double n = std::ceil(ext / spacing - 0.5 - 1e-9);
  for (long long i = 0; i < static_cast<long long>(n); ++i) out.push_back(min + (static_cast<double>(i) + 0.5) * spacing);
  return out;
}

std::size_t ray_crossings(const TriangleMesh& mesh, const Vec3& p, int axis) {
  const int b = (axis + 1) % 3, c = (axis + 2) % 3;
  std::size_t hits = 0;
  for (const auto& t : mesh.triangles) {
    auto h = ray_hit(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]], p[b], p[c], axis);
    if (h && *h > p[axis]) ++hits;
  }
  return hits;
}

bool point_in_mesh(const TriangleMesh& mesh, const Vec3& p) {
  int votes = 0;
  for (int axis = 0; axis < 3; ++axis) votes += static_cast<int>(ray_crossings(mesh, p, axis) % 2);
  return votes >= 2;
}

ParticleSample sample_volume(const TriangleMesh& mesh, double particle_spacing) {
  mesh.validate();
  const Vec3 lo = mesh.bbox_min(), hi = mesh.bbox_max();
  std::array<std::vector<double>, 3> g;
  for (int a = 0; a < 3; ++a) g[a] = grid_axis(lo[a], hi[a], particle_spacing);
  const std::size_t nx = g[0].size(), ny = g[1].size(), nz = g[2].size();
  const std::size_t total = nx * ny * nz;

  // Per-axis parity computed one grid line at a time: the triangles hit by a
  // line are shared by every grid point on it.
  std::vector<unsigned char> votes(total, 0);
  auto id = [&](std::size_t i, std::size_t j, std::size_t k) { return (i * ny + j) * nz + k; };
  std::vector<double> hits;
  for (int axis = 0; axis < 3 && total > 0; ++axis) {
    const int b = (axis + 1) % 3, c = (axis + 2) % 3;
    for (std::size_t ib = 0; ib < g[b].size(); ++ib)
      for (std::size_t ic = 0; ic < g[c].size(); ++ic) {
        const double pb = g[b][ib], pc = g[c][ic];
        hits.clear();
        for (const auto& t : mesh.triangles)
          if (auto h = ray_hit(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]], pb, pc, axis))
            hits.push_back(*h);
        if (hits.empty()) continue;
        std::sort(hits.begin(), hits.end());
        for (std::size_t ia = 0; ia < g[axis].size(); ++ia) {
          const auto above = hits.end() - std::upper_bound(hits.begin(), hits.end(), g[axis][ia]);
          if (above % 2 == 0) continue;
          std::size_t idx[3];
          idx[axis] = ia;
          idx[b] = ib;
          idx[c] = ic;
          ++votes[id(idx[0], idx[1], idx[2])];
        }
      }
  }

  ParticleSample out;
  out.source_name = mesh.name;
  out.particle_spacing = particle_spacing;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t k = 0; k < nz; ++k)
        if (votes[id(i, j, k)] >= 2) out.positions.emplace_back(g[0][i], g[1][j], g[2][k]);
  if (out.positions.empty())
    throw ConfigError("mesh '" + mesh.name + "' produced no particles at spacing " +
                      io::format_double(particle_spacing) + " (spacing too coarse for the structure)");
  return out;
}

}  // namespace pbdsim::geometry
