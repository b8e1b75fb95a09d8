#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pbdsim/calibration/scene.hpp"
#include "pbdsim/catheter/capsule.hpp"
#include "pbdsim/core/sim_config.hpp"
#include "pbdsim/metrics/records.hpp"

namespace pbdsim::calibration {

struct Protocol {
  double depth_max = 0.0314;
  double sample_interval = 0.00034;     // metrics recorded every this much depth
  double measurement_depth = 0.0314;    // slab center, measured from the start tip
  double slab_half_width = 0.0;         // 0 selects half the smallest particle spacing
  int repeats = 1;                      // records averaged over repeats

  void validate() const;
};

struct ExperimentOptions {
  core::SimConfig sim;
  catheter::CatheterRig rig;
  double contact_margin = 0.0;
  double contact_friction = 0.0;
  Protocol protocol;
  /// Largest particle speed allowed, as a multiple of the catheter speed.
  double max_speed_factor = 10.0;
  /// Fill ExperimentResult::contacts and step latencies.
  bool log_steps = true;
};

struct LatencyStats {
  double mean_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
  std::size_t steps = 0;
};

LatencyStats latency_stats(const std::vector<double>& step_ms);

struct ExperimentResult {
  metrics::InsertionRecord record;
  std::vector<metrics::ContactRow> contacts;  // one per step, last repeat
  std::vector<double> step_ms;                // every step of every repeat
  std::vector<Vec3> rest;                     // last repeat
  std::vector<Vec3> final_positions;          // last repeat
  std::size_t particles = 0;
  std::size_t clusters = 0;
  std::size_t links = 0;
  std::size_t pinned = 0;
  std::size_t slab_particles = 0;
  std::size_t steps = 0;  // per repeat
  std::size_t axis_fallbacks = 0;
  std::size_t degenerate_cluster_fits = 0;
  double max_speed = 0.0;
  double max_penetration = -std::numeric_limits<double>::infinity();
  double final_time = 0.0;
};

/// Steps the scene until the tip has penetrated depth_max, recording metrics
/// every sample_interval of depth (and at depth 0 and the final step). Throws
/// InstabilityError on non-finite state, speed above the limit, or a catheter
/// that advances more than its radius per substep.
ExperimentResult run_insertion(Scene scene, const ExperimentOptions& options);

/// Builds the scene once per repeat (noise seed offset by the repeat index)
/// and averages the records frame by frame.
ExperimentResult run_insertion_experiment(const SceneSpec& spec, const ExperimentOptions& options);

}  // namespace pbdsim::calibration
