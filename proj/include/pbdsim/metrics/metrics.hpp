#pragma once

#include <span>
#include <string>
#include <vector>

#include "pbdsim/common.hpp"

namespace pbdsim::metrics {

/// Euclidean distance travelled by the catheter tip.
double penetration_depth(const Vec3& tip_init, const Vec3& tip_now);

/// Particles whose rest position satisfies |(rest - origin)·axis - center| <= half_width.
struct Slab {
  Vec3 origin = Vec3::Zero();
  Vec3 axis = Vec3::UnitX();
  double center = 0.0314;
  double half_width = 0.00125;

  void validate() const;
};

std::vector<Index> select_slab(std::span<const Vec3> rest, const Slab& slab);

/// Mean of |p_rest - p_now| over the slab. Throws ConfigError when the slab is empty.
double slab_average_displacement(std::span<const Vec3> current, std::span<const Vec3> rest, const Slab& slab);
/// Same over a precomputed slab selection.
double mean_displacement(std::span<const Vec3> current, std::span<const Vec3> rest, std::span<const Index> subset);

/// Distance between rest and current centroids of `subset` (uniform masses).
double com_displacement(std::span<const Vec3> current, std::span<const Vec3> rest, std::span<const Index> subset);
/// Over every particle.
double com_displacement(std::span<const Vec3> current, std::span<const Vec3> rest);

// Hole-perimeter probes ------------------------------------------------------

struct ProbeSpec {
  Vec3 origin = Vec3::Zero();  // a point on the hole axis
  Vec3 direction = Vec3::UnitX();
  double hole_radius = 0.00125;
  double depth_start = 0.0;  // stations are measured from origin along direction
  double depth_end = 0.0314;

  void validate() const;
};

inline constexpr int kProbeStations = 5;
inline constexpr int kProbeSides = 4;

struct ProbePoint {
  std::string plane;  // world plane holding the axis and the offset, e.g. "xz"
  int side = 0;       // 1..4
  int station = 0;    // 1..5, increasing depth
  Vec3 rest_position = Vec3::Zero();
};

/// Perimeter frame: u = normalize(direction × e), e the world axis least
/// aligned with direction (lowest index on ties); v = direction × u.
void probe_frame(const Vec3& direction, Vec3& u, Vec3& v);

/// World plane ("xy", "xz" or "yz") closest to the one spanned by a and b.
std::string plane_label(const Vec3& a, const Vec3& b);

/// 20 points ordered by side (+u, -u, +v, -v), then station.
std::vector<ProbePoint> make_probe_points(const ProbeSpec& spec);

struct ProbeSample {
  ProbePoint point;
  Index particle = 0;  // nearest rest particle
  double distance = 0.0;  // probe to that particle at rest
  Vec3 displacement = Vec3::Zero();
  double magnitude = 0.0;
};

struct ProbeField {
  std::vector<ProbeSample> samples;
  double mean_displacement = 0.0;

  /// Per-station mean over the 4 sides, stations in increasing depth.
  std::vector<double> station_means() const;
};

/// Nearest-rest-particle displacement at each probe. Throws ConfigError when
/// a probe's nearest particle is farther than 2 * particle_spacing.
ProbeField sample_hole_perimeter(const ProbeSpec& spec, std::span<const Vec3> rest, std::span<const Vec3> current,
                                 double particle_spacing);

// Curve comparison ----------------------------------------------------------

struct Curve {
  std::vector<double> depth;  // strictly increasing
  std::vector<double> value;

  std::size_t size() const { return depth.size(); }
  /// Throws ConfigError unless sizes match, >= 2 points, finite, strictly increasing depth.
  void validate(const std::string& what) const;
  /// Linear interpolation; depth must lie within [front, back].
  double at(double d) const;
};

struct MismatchPoint {
  double depth = 0.0;
  double sim = 0.0;
  double ref = 0.0;
  double rel_error = 0.0;
};

struct Mismatch {
  double mse_pct = 0.0;  // 100 * sqrt(mean(rel_error^2))
  double rmse_m = 0.0;   // sqrt(mean((sim - ref)^2))
  double normalizer = 0.0;  // max(ref) over the overlap, or 1 m when that is 0
  double overlap_start = 0.0;
  double overlap_end = 0.0;
  double overlap_width = 0.0;
  std::vector<MismatchPoint> per_depth;
};

/// Both curves are resampled onto the union of their depths inside the
/// overlap. rel_error = |sim - ref| / max(ref). Throws ConfigError when the
/// depth ranges do not overlap.
Mismatch mismatch_score(const Curve& sim, const Curve& ref);

}  // namespace pbdsim::metrics
