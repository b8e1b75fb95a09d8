#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pbdsim/calibration/experiment.hpp"
#include "pbdsim/metrics/metrics.hpp"
#include "pbdsim/shape/clusters.hpp"

namespace pbdsim::calibration {

/// Closed interval sampled at `resolution` grid values (the midpoint when 1).
struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
  int resolution = 1;

  bool fixed() const { return hi == lo; }
  std::vector<double> grid() const;
};

inline constexpr int kParamDims = 5;

struct ParamSpace {
  ParamRange cluster_spacing{0.005, 0.035, 3};
  ParamRange cluster_radius{0.0025, 0.035, 3};
  ParamRange cluster_stiffness{0.0, 1.0, 5};
  ParamRange link_radius{0.0025, 0.0025, 1};
  ParamRange link_stiffness{0.001, 0.001, 1};

  /// Non-empty ranges, positive lengths, stiffness within [0,1].
  void validate() const;
  ParamRange& dim(int d);
  const ParamRange& dim(int d) const;
  /// Raises cluster_radius to cluster_spacing / 2 when needed; false when
  /// that leaves the radius range.
  bool repair(shape::ClusterParams& p) const;
};

double param_value(const shape::ClusterParams& p, int d);
void set_param_value(shape::ClusterParams& p, int d, double v);
const char* param_name(int d);

/// Simulated displacement-vs-depth curve for a parameter set. May throw
/// InstabilityError, which marks the point unstable.
using Objective = std::function<metrics::Curve(const shape::ClusterParams&)>;

struct Evaluation {
  std::size_t index = 0;
  std::string phase;  // "grid" or "descent"
  shape::ClusterParams params;
  double score_pct = 0.0;  // inf when unstable
  double rmse_m = 0.0;
  std::string status;  // "ok" or "unstable"
  std::string message;
};

struct CalibrationOptions {
  int budget = 200;
  double min_step_fraction = 1e-4;  // descent stops below this fraction of each range
  bool parallel = true;             // evaluate grid points concurrently
};

struct CalibrationResult {
  shape::ClusterParams best;
  double best_score_pct = 0.0;
  double best_rmse_m = 0.0;
  std::size_t best_index = 0;
  std::vector<Evaluation> trace;  // evaluation-index order
};

/// Feasible, deduplicated grid points in spacing-major order, with resolutions
/// lowered until at most `max_points` remain.
std::vector<shape::ClusterParams> grid_points(const ParamSpace& space, std::size_t max_points);

/// Coarse grid pass followed by coordinate descent from the grid optimum.
/// Throws ConfigError for budget < 1, InstabilityError when every evaluation is unstable.
CalibrationResult calibrate(const ParamSpace& space, const metrics::Curve& reference, const Objective& objective,
                            const CalibrationOptions& options = {});

/// Objective running a full insertion with `target`'s cluster parameters
/// replaced; the inner solver runs serially.
Objective make_experiment_objective(SceneSpec spec, std::string target, ExperimentOptions options);

void write_trace_csv(std::ostream& out, const std::vector<Evaluation>& trace);
std::vector<Evaluation> read_trace_csv(std::istream& in, const std::string& source);

}  // namespace pbdsim::calibration
