#include "pbdsim/calibration/scene.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "pbdsim/geometry/sampling.hpp"
#include "pbdsim/shape/links.hpp"

namespace pbdsim::calibration {

namespace {

const char* const kFaces[6] = {"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"};

int face_id(const std::string& f) {
  for (int i = 0; i < 6; ++i)
    if (f == kFaces[i]) return i;
  return -1;
}

}  // namespace

void SceneSpec::validate() const {
  if (meshes.empty()) throw ConfigError("scene has no meshes");
  for (const auto& m : meshes) table.find(m.structure).validate();
  for (const auto& [name, p] : overrides) {
    if (!table.contains(name)) throw ConfigError("override for unknown structure '" + name + "'");
    p.validate();
  }
  for (const auto& f : pinned_faces)
    if (face_id(f) < 0) throw ConfigError("unknown pinned face '" + f + "' (use xmin, xmax, ymin, ymax, zmin, zmax)");
  if (!(noise >= 0.0 && noise < 0.5)) throw ConfigError("scene noise must be in [0, 0.5)");
}

StructureParams effective_params(const SceneSpec& spec, const std::string& structure) {
  StructureParams p = spec.table.find(structure);
  if (auto it = spec.overrides.find(structure); it != spec.overrides.end()) p.cluster = it->second;
  return p;
}

Scene build_scene(const SceneSpec& spec, std::uint64_t repeat) {
  spec.validate();
  Scene scene;
  std::mt19937_64 rng(spec.seed + repeat);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  std::vector<double> spacing_of;  // per particle
  scene.min_particle_spacing = std::numeric_limits<double>::infinity();

  for (const auto& sm : spec.meshes) {
    const StructureParams p = effective_params(spec, sm.structure);
    auto sample = geometry::sample_volume(sm.mesh, p.particle_spacing);
    if (spec.noise > 0.0)
      for (auto& x : sample.positions)
        x += Vec3(jitter(rng), jitter(rng), jitter(rng)) * (spec.noise * p.particle_spacing);

    const auto offset = static_cast<Index>(scene.rest.size());
    auto clusters = shape::build_clusters(sample.positions, p.cluster, offset);
    auto links = shape::build_links(sample.positions, p.cluster.link_radius, p.cluster.link_stiffness, offset);
    std::move(clusters.begin(), clusters.end(), std::back_inserter(scene.constraints.clusters));
    std::move(links.begin(), links.end(), std::back_inserter(scene.constraints.links));

    auto it = std::find_if(scene.structures.begin(), scene.structures.end(),
                           [&](const StructureRange& r) { return r.name == sm.structure; });
    if (it == scene.structures.end()) {
      scene.structures.push_back({sm.structure, {}});
      it = scene.structures.end() - 1;
    }
    for (std::size_t i = 0; i < sample.positions.size(); ++i) {
      it->particles.push_back(offset + static_cast<Index>(i));
      scene.rest.push_back(sample.positions[i]);
      spacing_of.push_back(p.particle_spacing);
    }
    scene.min_particle_spacing = std::min(scene.min_particle_spacing, p.particle_spacing);
  }

  scene.system = core::ParticleSystem::from_positions(scene.rest);
  if (!spec.pinned_faces.empty()) {
    Vec3 lo = scene.rest[0], hi = scene.rest[0];
    for (const auto& x : scene.rest) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    for (std::size_t i = 0; i < scene.rest.size(); ++i) {
      const double tol = 0.25 * spacing_of[i] * (1.0 + 2.0 * spec.noise);
      for (const auto& f : spec.pinned_faces) {
        const int id = face_id(f), axis = id / 2;
        const double bound = (id % 2 == 0) ? lo[axis] : hi[axis];
        if (std::abs(scene.rest[i][axis] - bound) <= tol) {
          scene.system.inv_mass[i] = 0.0;
          break;
        }
      }
    }
  }
  scene.pinned_count = static_cast<std::size_t>(
      std::count(scene.system.inv_mass.begin(), scene.system.inv_mass.end(), 0.0));
  return scene;
}

}  // namespace pbdsim::calibration
