#include "pbdsim/calibration/calibrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <ostream>

#include "pbdsim/io/csv.hpp"

namespace pbdsim::calibration {

using io::format_double;

namespace {

using Key = std::array<double, kParamDims>;

Key key_of(const shape::ClusterParams& p) {
  Key k;
  for (int d = 0; d < kParamDims; ++d) k[d] = param_value(p, d);
  return k;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<double> ParamRange::grid() const {
  if (resolution <= 1 || fixed()) return {0.5 * (lo + hi)};
  std::vector<double> out;
  for (int i = 0; i < resolution; ++i) out.push_back(i + 1 == resolution ? hi : lo + (hi - lo) * i / (resolution - 1));
  return out;
}

ParamRange& ParamSpace::dim(int d) {
  switch (d) {
    case 0: return cluster_spacing;
    case 1: return cluster_radius;
    case 2: return cluster_stiffness;
    case 3: return link_radius;
    case 4: return link_stiffness;
  }
  throw Error("parameter dimension out of range");
}

const ParamRange& ParamSpace::dim(int d) const { return const_cast<ParamSpace*>(this)->dim(d); }

const char* param_name(int d) {
  static const char* const names[kParamDims] = {"cluster_spacing", "cluster_radius", "cluster_stiffness",
                                                "link_radius", "link_stiffness"};
  return names[d];
}

double param_value(const shape::ClusterParams& p, int d) {
  switch (d) {
    case 0: return p.cluster_spacing;
    case 1: return p.cluster_radius;
    case 2: return p.cluster_stiffness;
    case 3: return p.link_radius;
    case 4: return p.link_stiffness;
  }
  throw Error("parameter dimension out of range");
}

void set_param_value(shape::ClusterParams& p, int d, double v) {
  switch (d) {
    case 0: p.cluster_spacing = v; return;
    case 1: p.cluster_radius = v; return;
    case 2: p.cluster_stiffness = v; return;
    case 3: p.link_radius = v; return;
    case 4: p.link_stiffness = v; return;
  }
  throw Error("parameter dimension out of range");
}

void ParamSpace::validate() const {
  for (int d = 0; d < kParamDims; ++d) {
    const auto& r = dim(d);
    const std::string n = param_name(d);
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.hi < r.lo)
      throw ConfigError("calibration range for " + n + " is empty");
    if (r.resolution < 1) throw ConfigError("calibration resolution for " + n + " must be >= 1");
    const bool stiffness = d == 2 || d == 4;
    if (stiffness && (r.lo < 0.0 || r.hi > 1.0)) throw ConfigError("calibration range for " + n + " exceeds [0,1]");
    if (!stiffness && !(r.lo > 0.0)) throw ConfigError("calibration range for " + n + " must be > 0");
  }
  if (cluster_radius.hi < 0.5 * cluster_spacing.lo)
    throw ConfigError("calibration ranges admit no cluster_radius >= cluster_spacing / 2");
}

bool ParamSpace::repair(shape::ClusterParams& p) const {
  if (p.cluster_radius < 0.5 * p.cluster_spacing) p.cluster_radius = 0.5 * p.cluster_spacing;
  return p.cluster_radius <= cluster_radius.hi;
}

std::vector<shape::ClusterParams> grid_points(const ParamSpace& space_in, std::size_t max_points) {
  space_in.validate();
  max_points = std::max<std::size_t>(max_points, 1);
  ParamSpace space = space_in;
  for (;;) {
    std::array<std::vector<double>, kParamDims> g;
    for (int d = 0; d < kParamDims; ++d) g[d] = space.dim(d).grid();
    std::vector<shape::ClusterParams> pts;
    std::map<Key, bool> seen;
    std::array<std::size_t, kParamDims> i{};
    for (;;) {
      shape::ClusterParams p;
      for (int d = 0; d < kParamDims; ++d) set_param_value(p, d, g[d][i[d]]);
      if (space.repair(p) && seen.emplace(key_of(p), true).second) pts.push_back(p);
      int d = kParamDims - 1;
      while (d >= 0 && ++i[d] == g[d].size()) i[d--] = 0;
      if (d < 0) break;
    }
    if (pts.size() <= max_points) return pts;
    int widest = -1;
    for (int d = 0; d < kParamDims; ++d)
      if (space.dim(d).resolution > 1 && (widest < 0 || space.dim(d).resolution > space.dim(widest).resolution))
        widest = d;
    if (widest < 0) return pts;
    --space.dim(widest).resolution;
  }
}

CalibrationResult calibrate(const ParamSpace& space, const metrics::Curve& reference, const Objective& objective,
                            const CalibrationOptions& options) {
  if (options.budget < 1) throw ConfigError("calibration budget must be >= 1");
  space.validate();
  reference.validate("reference curve");
  CalibrationResult result;
  std::map<Key, std::size_t> cache;

  auto score = [&](Evaluation& e) {
    try {
      const metrics::Curve sim = objective(e.params);
      const auto m = metrics::mismatch_score(sim, reference);
      e.score_pct = m.mse_pct;
      e.rmse_m = m.rmse_m;
      e.status = "ok";
    } catch (const InstabilityError& err) {
      e.score_pct = kInf;
      e.rmse_m = kInf;
      e.status = "unstable";
      e.message = err.what();
    }
  };
  auto record = [&](Evaluation e) {
    e.index = result.trace.size();
    cache.emplace(key_of(e.params), e.index);
    result.trace.push_back(std::move(e));
  };

  // Grid pass.
  const auto pts = grid_points(space, static_cast<std::size_t>(std::max(1, options.budget / 2)));
  std::vector<Evaluation> grid(pts.size());
  std::vector<std::exception_ptr> errors(pts.size());
  const long n = static_cast<long>(pts.size());
#pragma omp parallel for schedule(dynamic, 1) if (options.parallel)
  for (long i = 0; i < n; ++i) {
    grid[i].phase = "grid";
    grid[i].params = pts[i];
    try {
      score(grid[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (auto& e : grid) record(std::move(e));

  auto best_index = [&] {
    std::size_t b = 0;
    for (std::size_t i = 1; i < result.trace.size(); ++i)
      if (result.trace[i].score_pct < result.trace[b].score_pct) b = i;
    return b;
  };

  // Coordinate descent from the grid optimum.
  std::size_t best = best_index();
  if (std::isfinite(result.trace[best].score_pct)) {
    std::array<double, kParamDims> step{}, min_step{};
    for (int d = 0; d < kParamDims; ++d) {
      const auto& r = space.dim(d);
      const double span = r.hi - r.lo;
      const auto g = r.grid();
      step[d] = g.size() > 1 ? 0.5 * (g[1] - g[0]) : 0.25 * span;
      min_step[d] = options.min_step_fraction * span;
    }
    auto budget_left = [&] { return result.trace.size() < static_cast<std::size_t>(options.budget); };
    bool active = true;
    while (active && budget_left()) {
      bool improved = false;
      for (int d = 0; d < kParamDims && budget_left(); ++d) {
        const auto& r = space.dim(d);
        if (r.fixed() || step[d] < min_step[d]) continue;
        for (double sign : {1.0, -1.0}) {
          shape::ClusterParams cand = result.trace[best].params;
          set_param_value(cand, d, std::clamp(param_value(cand, d) + sign * step[d], r.lo, r.hi));
          if (!space.repair(cand) || key_of(cand) == key_of(result.trace[best].params)) continue;
          std::size_t idx;
          if (auto it = cache.find(key_of(cand)); it != cache.end()) {
            idx = it->second;
          } else {
            if (!budget_left()) break;
            Evaluation e;
            e.phase = "descent";
            e.params = cand;
            score(e);
            record(std::move(e));
            idx = result.trace.size() - 1;
          }
          if (result.trace[idx].score_pct < result.trace[best].score_pct) {
            best = idx;
            improved = true;
            break;
          }
        }
      }
      if (!improved) {
        active = false;
        for (int d = 0; d < kParamDims; ++d) {
          step[d] *= 0.5;
          if (!space.dim(d).fixed() && step[d] >= min_step[d]) active = true;
        }
      }
    }
  }

  best = best_index();
  if (!std::isfinite(result.trace[best].score_pct)) {
    std::string region;
    for (int d = 0; d < kParamDims; ++d) {
      double lo = kInf, hi = -kInf;
      for (const auto& e : result.trace) {
        lo = std::min(lo, param_value(e.params, d));
        hi = std::max(hi, param_value(e.params, d));
      }
      region += std::string(d ? ", " : "") + param_name(d) + " [" + format_double(lo) + ", " + format_double(hi) + "]";
    }
    throw InstabilityError("all " + std::to_string(result.trace.size()) + " calibration evaluations were unstable over " +
                region + "; first: " + result.trace.front().message);
  }
  result.best = result.trace[best].params;
  result.best_score_pct = result.trace[best].score_pct;
  result.best_rmse_m = result.trace[best].rmse_m;
  result.best_index = best;
  return result;
}

Objective make_experiment_objective(SceneSpec spec, std::string target, ExperimentOptions options) {
  if (!spec.table.contains(target)) throw ConfigError("calibration target '" + target + "' is not in the parameter table");
  options.sim.policy = core::ExecPolicy::serial;
  options.log_steps = false;
  return [spec = std::move(spec), target = std::move(target), options](const shape::ClusterParams& p) {
    SceneSpec s = spec;
    s.overrides[target] = p;
    return run_insertion_experiment(s, options).record.slab_curve();
  };
}

void write_trace_csv(std::ostream& out, const std::vector<Evaluation>& trace) {
  out << "index,phase,cluster_spacing,cluster_radius,cluster_stiffness,link_radius,link_stiffness,score_pct,rmse_m,"
         "status\n";
  for (const auto& e : trace) {
    out << e.index << ',' << e.phase;
    for (int d = 0; d < kParamDims; ++d) out << ',' << format_double(param_value(e.params, d));
    out << ',' << format_double(e.score_pct) << ',' << format_double(e.rmse_m) << ',' << e.status << '\n';
  }
}

std::vector<Evaluation> read_trace_csv(std::istream& in, const std::string& source) {
  const auto t = io::read_csv(in, source);
  const std::vector<std::string> cols = {"index",       "phase",          "cluster_spacing", "cluster_radius",
                                         "cluster_stiffness", "link_radius", "link_stiffness", "score_pct",
                                         "rmse_m",      "status"};
  if (t.header != cols) throw ParseError(source + ": unexpected trace header");
  std::vector<Evaluation> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Evaluation e;
    e.index = static_cast<std::size_t>(t.number(r, 0));
    e.phase = t.text(r, 1);
    for (int d = 0; d < kParamDims; ++d) set_param_value(e.params, d, t.number(r, 2 + d));
    e.score_pct = t.number(r, 7);
    e.rmse_m = t.number(r, 8);
    e.status = t.text(r, 9);
    out.push_back(e);
  }
  return out;
}

}  // namespace pbdsim::calibration
