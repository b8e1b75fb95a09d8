#pragma once

#include "pbdsim/common.hpp"

namespace pbdsim::core {

enum class ExecPolicy { serial, parallel };

struct SimConfig {
  double dt = 1.0 / 60.0;
  int solver_iterations = 4;
  int substeps = 1;
  Vec3 gravity = Vec3::Zero();
  double damping = 0.01;  // velocity fraction removed per substep
  ExecPolicy policy = ExecPolicy::parallel;
  bool track_residuals = false;  // fill StepReport::link_residual_history

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("sim.dt must be > 0");
    if (solver_iterations < 1) throw ConfigError("sim.solver_iterations must be >= 1");
    if (substeps < 1) throw ConfigError("sim.substeps must be >= 1");
    if (!(damping >= 0.0 && damping <= 1.0)) throw ConfigError("sim.damping must be in [0,1]");
    if (!all_finite(gravity)) throw ConfigError("sim.gravity must be finite");
  }
};

}  // namespace pbdsim::core
