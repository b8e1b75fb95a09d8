#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pbdsim/calibration/param_table.hpp"
#include "pbdsim/core/particle_system.hpp"
#include "pbdsim/core/solver.hpp"
#include "pbdsim/geometry/mesh.hpp"

namespace pbdsim::calibration {

struct StructureMesh {
  std::string structure;
  geometry::TriangleMesh mesh;  // meters
};

struct SceneSpec {
  std::vector<StructureMesh> meshes;
  StructureParamTable table;
  /// Cluster/link parameters replacing the table entry of a structure.
  std::map<std::string, shape::ClusterParams> overrides;
  /// Any of xmin, xmax, ymin, ymax, zmin, zmax: particles within a quarter
  /// spacing of that face of the particle bounding box are pinned.
  std::vector<std::string> pinned_faces;
  std::uint64_t seed = 0;
  /// Uniform jitter amplitude on initial positions, as a fraction of the
  /// structure's particle spacing. 0 disables it.
  double noise = 0.0;

  void validate() const;
};

struct StructureRange {
  std::string name;
  std::vector<Index> particles;
};

struct Scene {
  core::ParticleSystem system;
  std::vector<Vec3> rest;
  core::ConstraintSet constraints;  // contact left unset
  std::vector<StructureRange> structures;  // one per distinct name, first-appearance order
  std::size_t pinned_count = 0;
  double min_particle_spacing = 0.0;
};

/// Samples every mesh at its structure's particle spacing and builds clusters
/// and links per mesh. `repeat` offsets the noise seed.
Scene build_scene(const SceneSpec& spec, std::uint64_t repeat = 0);

/// Effective parameters of a structure after overrides.
StructureParams effective_params(const SceneSpec& spec, const std::string& structure);

}  // namespace pbdsim::calibration
