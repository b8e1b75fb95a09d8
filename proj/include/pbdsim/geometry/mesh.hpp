#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pbdsim/common.hpp"

namespace pbdsim::geometry {

struct TriangleMesh {
  std::vector<Vec3> vertices;  // meters
  std::vector<std::array<Index, 3>> triangles;
  std::string name;

  Vec3 bbox_min() const;
  Vec3 bbox_max() const;
  /// Throws ConfigError on out-of-range indices or zero-area triangles.
  void validate() const;
};

struct MeshLoadReport {
  std::size_t dropped_degenerate = 0;
  std::size_t non_manifold_edges = 0;
  std::vector<std::string> warnings;
};

/// Reads the OBJ subset: `v x y z` and `f i j k ...` records (1-based,
/// optional `/vt/vn` suffixes ignored, polygons fan-triangulated). Other
/// records are skipped. Vertices are multiplied by `units_scale`.
TriangleMesh parse_obj(std::istream& in, const std::string& source, double units_scale,
                       MeshLoadReport* report = nullptr);
TriangleMesh load_mesh(const std::filesystem::path& path, double units_scale, MeshLoadReport* report = nullptr);
void write_obj(std::ostream& out, const TriangleMesh& mesh);
void write_obj_file(const std::filesystem::path& path, const TriangleMesh& mesh);

/// Axis-aligned box centered at the origin, outward winding.
TriangleMesh make_box_mesh(const Vec3& dimensions);
/// Subdivided icosahedron scaled to the given semi-axes, outward winding.
TriangleMesh make_ellipsoid_mesh(const Vec3& semi_axes, const Vec3& center = Vec3::Zero(), int subdivisions = 3);

/// Divergence-theorem volume; positive for outward winding.
double signed_volume(const TriangleMesh& mesh);

}  // namespace pbdsim::geometry
