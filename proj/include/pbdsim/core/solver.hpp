#pragma once

#include <optional>
#include <vector>

#include "pbdsim/catheter/capsule.hpp"
#include "pbdsim/core/kernels.hpp"
#include "pbdsim/core/particle_system.hpp"
#include "pbdsim/core/sim_config.hpp"
#include "pbdsim/core/stiffness.hpp"
#include "pbdsim/shape/clusters.hpp"
#include "pbdsim/shape/links.hpp"

namespace pbdsim::core {

struct CapsuleContact {
  catheter::CatheterRig rig;
  double margin = 0.0;
  double friction = 0.0;  // tangential correction coefficient, 0 = off
};

/// Everything projected during a step. Per iteration the passes run in a
/// fixed order: clusters, links, catheter contact.
struct ConstraintSet {
  std::vector<shape::ShapeCluster> clusters;
  std::vector<shape::DistanceLink> links;
  std::optional<CapsuleContact> contact;
};

struct StepReport {
  double max_position_delta = 0.0;  // largest per-substep particle move
  double max_speed = 0.0;
  std::vector<double> cluster_residuals;  // goal mismatch seen in the last pass
  std::vector<double> link_residuals;     // |C| after the step
  double cluster_residual_norm = 0.0;
  double link_residual_norm = 0.0;
  std::size_t degenerate_cluster_fits = 0;   // identity fallbacks, all passes
  std::vector<std::size_t> degenerate_clusters;  // ids seen in the last pass
  std::size_t contacts = 0;        // contacts in the last pass
  std::size_t axis_fallbacks = 0;  // on-axis pushes, all passes
  std::vector<double> link_residual_history;  // norm before pass 1, after each pass (last substep)
};

/// Owns the flattened constraint layout and scratch buffers for repeated
/// steps of one particle system. Not shareable during a step.
class Solver {
 public:
  Solver(ConstraintSet constraints, std::size_t particle_count);

  /// Advances `system` by config.dt starting at simulation time `time`.
  /// Throws InstabilityError on non-finite state (naming particle and pass).
  StepReport step(ParticleSystem& system, const SimConfig& config, double time);

  const ConstraintSet& constraints() const { return constraints_; }

 private:
  void refresh_stiffness(int iterations);
  [[noreturn]] void raise(std::size_t particle, const char* stage) const;

  ConstraintSet constraints_;
  std::size_t particle_count_;
  ClusterLayout clusters_;
  LinkLayout links_;
  Workspace ws_;
  int stiffness_iterations_ = -1;
};

/// One-shot convenience wrapper around Solver.
StepReport step(ParticleSystem& system, const ConstraintSet& constraints, const SimConfig& config,
                double time = 0.0);

}  // namespace pbdsim::core
