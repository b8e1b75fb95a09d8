#include "pbdsim/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pbdsim/io/csv.hpp"

namespace pbdsim::metrics {

namespace {

void check_sizes(std::span<const Vec3> current, std::span<const Vec3> rest) {
  if (current.size() != rest.size())
    throw ConfigError("current and rest position counts differ (" + std::to_string(current.size()) + " vs " +
                      std::to_string(rest.size()) + ")");
}

void check_unit(const Vec3& d, const char* what) {
  if (!all_finite(d) || std::abs(d.norm() - 1.0) > 1e-9) throw ConfigError(std::string(what) + " must be a unit vector");
}

}  // namespace

double penetration_depth(const Vec3& tip_init, const Vec3& tip_now) { return (tip_init - tip_now).norm(); }

void Slab::validate() const {
  check_unit(axis, "slab axis");
  if (!all_finite(origin) || !std::isfinite(center)) throw ConfigError("slab origin/center must be finite");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ConfigError("slab half_width must be > 0");
}

std::vector<Index> select_slab(std::span<const Vec3> rest, const Slab& slab) {
  slab.validate();
  std::vector<Index> out;
  // Relative tolerance so a particle plane sitting exactly on the boundary is kept.
  const double tol = slab.half_width * (1.0 + 1e-9);
  for (std::size_t i = 0; i < rest.size(); ++i)
    if (std::abs((rest[i] - slab.origin).dot(slab.axis) - slab.center) <= tol) out.push_back(static_cast<Index>(i));
  return out;
}

double mean_displacement(std::span<const Vec3> current, std::span<const Vec3> rest, std::span<const Index> subset) {
  check_sizes(current, rest);
  if (subset.empty()) throw ConfigError("displacement subset is empty");
  double sum = 0.0;
  for (Index i : subset) sum += (rest[i] - current[i]).norm();
  return sum / static_cast<double>(subset.size());
}

double slab_average_displacement(std::span<const Vec3> current, std::span<const Vec3> rest, const Slab& slab) {
  check_sizes(current, rest);
  const auto sel = select_slab(rest, slab);
  if (sel.empty())
    throw ConfigError("measurement slab at depth " + io::format_double(slab.center) + " m (half width " +
                      io::format_double(slab.half_width) + " m) selects no particles");
  return mean_displacement(current, rest, sel);
}

double com_displacement(std::span<const Vec3> current, std::span<const Vec3> rest, std::span<const Index> subset) {
  check_sizes(current, rest);
  if (subset.empty()) throw ConfigError("centroid subset is empty");
  Vec3 c0 = Vec3::Zero(), c1 = Vec3::Zero();
  for (Index i : subset) {
    c0 += rest[i];
    c1 += current[i];
  }
  return (c0 - c1).norm() / static_cast<double>(subset.size());
}

double com_displacement(std::span<const Vec3> current, std::span<const Vec3> rest) {
  check_sizes(current, rest);
  if (rest.empty()) throw ConfigError("centroid subset is empty");
  Vec3 c0 = Vec3::Zero(), c1 = Vec3::Zero();
  for (std::size_t i = 0; i < rest.size(); ++i) {
    c0 += rest[i];
    c1 += current[i];
  }
  return (c0 - c1).norm() / static_cast<double>(rest.size());
}

void ProbeSpec::validate() const {
  check_unit(direction, "probe direction");
  if (!all_finite(origin)) throw ConfigError("probe origin must be finite");
  if (!(hole_radius > 0.0) || !std::isfinite(hole_radius)) throw ConfigError("probe hole_radius must be > 0");
  if (!std::isfinite(depth_start) || !std::isfinite(depth_end) || !(depth_end > depth_start))
    throw ConfigError("probe depth range must satisfy depth_start < depth_end");
}

std::string plane_label(const Vec3& a, const Vec3& b) {
  int ia = 0, ib = 0;
  a.cwiseAbs().maxCoeff(&ia);
  b.cwiseAbs().maxCoeff(&ib);
  if (ia == ib) {
    Vec3 rest = b.cwiseAbs();
    rest[ia] = -1.0;
    rest.maxCoeff(&ib);
  }
  const char names[] = {'x', 'y', 'z'};
  return {names[std::min(ia, ib)], names[std::max(ia, ib)]};
}

void probe_frame(const Vec3& direction, Vec3& u, Vec3& v) {
  int least = 0;
  for (int a = 1; a < 3; ++a)
    if (std::abs(direction[a]) < std::abs(direction[least])) least = a;
  u = direction.cross(Vec3::Unit(least)).normalized();
  v = direction.cross(u);
}

std::vector<ProbePoint> make_probe_points(const ProbeSpec& spec) {
  spec.validate();
  Vec3 u, v;
  probe_frame(spec.direction, u, v);
  const Vec3 offsets[kProbeSides] = {u, -u, v, -v};
  std::vector<ProbePoint> out;
  for (int s = 0; s < kProbeSides; ++s)
    for (int k = 0; k < kProbeStations; ++k) {
      const double d = spec.depth_start + (spec.depth_end - spec.depth_start) * k / (kProbeStations - 1);
      ProbePoint p;
      p.plane = plane_label(spec.direction, offsets[s]);
      p.side = s + 1;
      p.station = k + 1;
      p.rest_position = spec.origin + spec.direction * d + offsets[s] * spec.hole_radius;
      out.push_back(p);
    }
  return out;
}

std::vector<double> ProbeField::station_means() const {
  std::vector<double> sum(kProbeStations, 0.0);
  std::vector<int> count(kProbeStations, 0);
  for (const auto& s : samples) {
    sum[s.point.station - 1] += s.magnitude;
    ++count[s.point.station - 1];
  }
  for (int k = 0; k < kProbeStations; ++k) sum[k] = count[k] ? sum[k] / count[k] : 0.0;
  return sum;
}

ProbeField sample_hole_perimeter(const ProbeSpec& spec, std::span<const Vec3> rest, std::span<const Vec3> current,
                                 double particle_spacing) {
  check_sizes(current, rest);
  if (!(particle_spacing > 0.0)) throw ConfigError("particle_spacing must be > 0");
  if (rest.empty()) throw ConfigError("no particles to sample");
  ProbeField field;
  double sum = 0.0;
  for (const auto& p : make_probe_points(spec)) {
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rest.size(); ++i) {
      const double d2 = (rest[i] - p.rest_position).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    ProbeSample s;
    s.point = p;
    s.particle = static_cast<Index>(best);
    s.distance = std::sqrt(best_d2);
    if (s.distance > 2.0 * particle_spacing)
      throw ConfigError("probe side " + std::to_string(p.side) + " station " + std::to_string(p.station) +
                        ": nearest particle is " + io::format_double(s.distance) + " m away (> 2 x spacing " +
                        io::format_double(particle_spacing) + " m); field too sparse at the hole");
    s.displacement = current[best] - rest[best];
    s.magnitude = s.displacement.norm();
    sum += s.magnitude;
    field.samples.push_back(s);
  }
  field.mean_displacement = sum / static_cast<double>(field.samples.size());
  return field;
}

void Curve::validate(const std::string& what) const {
  if (depth.size() != value.size()) throw ConfigError(what + ": depth and value counts differ");
  if (depth.size() < 2) throw ConfigError(what + ": needs at least 2 points, got " + std::to_string(depth.size()));
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (!std::isfinite(depth[i]) || !std::isfinite(value[i]))
      throw ConfigError(what + ": non-finite value at point " + std::to_string(i));
    if (i > 0 && !(depth[i] > depth[i - 1]))
      throw ConfigError(what + ": depth must be strictly increasing (point " + std::to_string(i) + ")");
  }
}

double Curve::at(double d) const {
  if (depth.empty()) throw ConfigError("empty curve");
  if (d <= depth.front()) return value.front();
  if (d >= depth.back()) return value.back();
  const auto it = std::upper_bound(depth.begin(), depth.end(), d);
  const std::size_t hi = static_cast<std::size_t>(it - depth.begin()), lo = hi - 1;
  const double t = (d - depth[lo]) / (depth[hi] - depth[lo]);
  return value[lo] + t * (value[hi] - value[lo]);
}

Mismatch mismatch_score(const Curve& sim, const Curve& ref) {
  sim.validate("simulated curve");
  ref.validate("reference curve");
  Mismatch m;
  m.overlap_start = std::max(sim.depth.front(), ref.depth.front());
  m.overlap_end = std::min(sim.depth.back(), ref.depth.back());
  if (!(m.overlap_end > m.overlap_start))
    throw ConfigError("simulated depth range [" + io::format_double(sim.depth.front()) + ", " +
                      io::format_double(sim.depth.back()) + "] and reference range [" +
                      io::format_double(ref.depth.front()) + ", " + io::format_double(ref.depth.back()) +
                      "] do not overlap");
  m.overlap_width = m.overlap_end - m.overlap_start;

  std::vector<double> grid;
  for (const auto* c : {&sim, &ref})
    for (double d : c->depth)
      if (d >= m.overlap_start && d <= m.overlap_end) grid.push_back(d);
  grid.push_back(m.overlap_start);
  grid.push_back(m.overlap_end);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double ref_max = -std::numeric_limits<double>::infinity();
  for (double d : grid) {
    MismatchPoint p;
    p.depth = d;
    p.sim = sim.at(d);
    p.ref = ref.at(d);
    ref_max = std::max(ref_max, p.ref);
    m.per_depth.push_back(p);
  }
  m.normalizer = ref_max > 0.0 ? ref_max : 1.0;
  double sq_rel = 0.0, sq_abs = 0.0;
  for (auto& p : m.per_depth) {
    const double diff = std::abs(p.sim - p.ref);
    p.rel_error = diff / m.normalizer;
    sq_rel += p.rel_error * p.rel_error;
    sq_abs += diff * diff;
  }
  const double n = static_cast<double>(m.per_depth.size());
  m.mse_pct = 100.0 * std::sqrt(sq_rel / n);
  m.rmse_m = std::sqrt(sq_abs / n);
  return m;
}

}  // namespace pbdsim::metrics
