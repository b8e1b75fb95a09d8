#pragma once

#include <sstream>
#include <string>

#include "pbdsim/calibration/experiment.hpp"
#include "pbdsim/calibration/scene.hpp"
#include "pbdsim/geometry/mesh.hpp"

namespace fixture {

inline pbdsim::calibration::StructureParamTable white_matter_table(double spacing = 0.0025) {
  std::istringstream in("name,particle_spacing,cluster_spacing,cluster_radius,cluster_stiffness,link_radius,"
                        "link_stiffness\nwhite_matter," + std::to_string(spacing) +
                        ",0.005,0.005,0.002,0.0025,0.001\n");
  return pbdsim::calibration::parse_param_table(in, "fixture");
}

// The 50 x 17.5 x 17.5 mm phantom, built in code rather than read from data/.
inline pbdsim::calibration::SceneSpec phantom_spec(double spacing = 0.0025) {
  pbdsim::calibration::SceneSpec spec;
  spec.meshes.push_back({"white_matter", pbdsim::geometry::make_box_mesh({0.05, 0.0175, 0.0175})});
  spec.table = white_matter_table(spacing);
  spec.pinned_faces = {"xmax", "ymin", "ymax", "zmin"};
  return spec;
}

inline pbdsim::calibration::ExperimentOptions phantom_options() {
  pbdsim::calibration::ExperimentOptions o;
  o.rig.radius = 0.00125;
  o.rig.start_tip = {-0.025, 0.0004, 0.0003};
  o.rig.direction = pbdsim::Vec3::UnitX();
  o.rig.speed = 0.0005;
  o.rig.shaft_length = 0.1;
  o.log_steps = false;
  return o;
}

}  // namespace fixture
