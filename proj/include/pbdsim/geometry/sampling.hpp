#pragma once

#include <string>
#include <vector>

#include "pbdsim/common.hpp"
#include "pbdsim/geometry/mesh.hpp"

namespace pbdsim::geometry {

struct ParticleSample {
  std::vector<Vec3> positions;
  std::string source_name;
  double particle_spacing = 0.0;
};

/// Grid coordinates along one axis: min + (i + 1/2) * spacing, every point
/// strictly inside [min, max].
std::vector<double> grid_axis(double min, double max, double spacing);

/// Inside test by parity of crossings of axis-aligned rays along +x, +y and
/// +z; the point is inside when at least two rays agree.
bool point_in_mesh(const TriangleMesh& mesh, const Vec3& p);

/// Number of surface crossings of the ray from `p` along +axis.
std::size_t ray_crossings(const TriangleMesh& mesh, const Vec3& p, int axis);

/// Grid points anchored at the bounding-box min corner, kept when inside.
/// Order is x-major, then y, then z. Throws ConfigError when empty.
ParticleSample sample_volume(const TriangleMesh& mesh, double particle_spacing);

}  // namespace pbdsim::geometry
