#include "pbdsim/calibration/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pbdsim/io/csv.hpp"
#include "pbdsim/metrics/metrics.hpp"

namespace pbdsim::calibration {

using io::format_double;

void Protocol::validate() const {
  if (!(depth_max >= 0.0) || !std::isfinite(depth_max)) throw ConfigError("protocol.depth_max must be >= 0");
  if (!(sample_interval > 0.0) || !std::isfinite(sample_interval))
    throw ConfigError("protocol.sample_interval must be > 0");
  if (!std::isfinite(measurement_depth)) throw ConfigError("protocol.measurement_depth must be finite");
  if (!(slab_half_width >= 0.0) || !std::isfinite(slab_half_width))
    throw ConfigError("protocol.slab_half_width must be >= 0");
  if (repeats < 1) throw ConfigError("protocol.repeats must be >= 1");
}

LatencyStats latency_stats(const std::vector<double>& step_ms) {
  LatencyStats s;
  s.steps = step_ms.size();
  if (step_ms.empty()) return s;
  double sum = 0.0;
  for (double v : step_ms) sum += v;
  s.mean_ms = sum / static_cast<double>(step_ms.size());
  std::vector<double> sorted = step_ms;
  std::sort(sorted.begin(), sorted.end());
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
  s.p95_ms = sorted[std::max<std::size_t>(rank, 1) - 1];
  s.max_ms = sorted.back();
  return s;
}

ExperimentResult run_insertion(Scene scene, const ExperimentOptions& options) {
  options.sim.validate();
  options.rig.validate();
  options.protocol.validate();
  const auto& rig = options.rig;
  const auto& protocol = options.protocol;
  if (protocol.depth_max > 0.0 && !(rig.speed > 0.0))
    throw ConfigError("protocol.depth_max > 0 needs catheter.speed > 0");
  const double h = options.sim.dt / options.sim.substeps;
  if (rig.speed * h > rig.radius)
    throw InstabilityError("catheter advances " + format_double(rig.speed * h) + " m per substep, more than its radius " +
                               format_double(rig.radius) + " m (particles would tunnel); reduce sim.dt",
                           InstabilityError::npos, "catheter advance");

  ExperimentResult res;
  res.rest = scene.rest;
  res.particles = scene.rest.size();
  res.clusters = scene.constraints.clusters.size();
  res.links = scene.constraints.links.size();
  res.pinned = scene.pinned_count;
  for (const auto& s : scene.structures) res.record.structures.push_back(s.name);

  metrics::Slab slab;
  slab.origin = rig.start_tip;
  slab.axis = rig.direction;
  slab.center = protocol.measurement_depth;
  slab.half_width = protocol.slab_half_width > 0.0 ? protocol.slab_half_width : 0.5 * scene.min_particle_spacing;
  const auto slab_sel = metrics::select_slab(scene.rest, slab);
  if (slab_sel.empty())
    throw ConfigError("measurement slab at depth " + format_double(slab.center) + " m (half width " +
                      format_double(slab.half_width) + " m) selects no particles");
  res.slab_particles = slab_sel.size();

  const double overlap = catheter::max_penetration(catheter::pose_at(rig, 0.0), scene.rest, scene.system.inv_mass,
                                                   options.contact_margin);
  if (overlap > 0.0)
    throw ConfigError("catheter starts " + format_double(overlap) +
                      " m inside the tissue; move catheter.start_tip back along the insertion direction");

  core::ConstraintSet constraints = std::move(scene.constraints);
  constraints.contact = core::CapsuleContact{rig, options.contact_margin, options.contact_friction};
  core::Solver solver(std::move(constraints), scene.system.count());
  auto& sys = scene.system;

  auto frame_at = [&](double t) {
    metrics::InsertionFrame f;
    f.time = t;
    f.depth = metrics::penetration_depth(rig.start_tip, catheter::pose_at(rig, t).tip);
    f.slab_avg_disp = metrics::mean_displacement(sys.positions, scene.rest, slab_sel);
    f.com_disp = metrics::com_displacement(sys.positions, scene.rest);
    for (const auto& s : scene.structures)
      f.per_structure.push_back(metrics::com_displacement(sys.positions, scene.rest, s.particles));
    return f;
  };

  res.record.append(frame_at(0.0));
  const double speed_limit = options.max_speed_factor * rig.speed;
  std::size_t next_sample = 1;
  double t = 0.0, depth = 0.0;
  bool last_recorded = true;
  for (std::size_t n = 0; depth < protocol.depth_max; ++n) {
    const double t0 = static_cast<double>(n) * options.sim.dt;
    const auto clock0 = std::chrono::steady_clock::now();
    const core::StepReport rep = solver.step(sys, options.sim, t0);
    const auto clock1 = std::chrono::steady_clock::now();
    t = static_cast<double>(n + 1) * options.sim.dt;
    depth = metrics::penetration_depth(rig.start_tip, catheter::pose_at(rig, t).tip);
    ++res.steps;
    res.axis_fallbacks += rep.axis_fallbacks;
    res.degenerate_cluster_fits += rep.degenerate_cluster_fits;
    res.max_speed = std::max(res.max_speed, rep.max_speed);
    if (rep.max_speed > speed_limit) {
      std::size_t worst = 0;
      for (std::size_t i = 1; i < sys.count(); ++i)
        if (sys.velocities[i].norm() > sys.velocities[worst].norm()) worst = i;
      throw InstabilityError("particle " + std::to_string(worst) + " speed " + format_double(rep.max_speed) +
                                 " m/s exceeds " + format_double(options.max_speed_factor) +
                                 " x catheter speed at frame " + std::to_string(n + 1) + " (t = " + format_double(t) +
                                 " s)",
                             worst, "velocity limit");
    }
    const double pen = catheter::max_penetration(catheter::pose_at(rig, t), sys.positions, sys.inv_mass,
                                                 options.contact_margin);
    res.max_penetration = std::max(res.max_penetration, pen);
    if (options.log_steps) {
      res.step_ms.push_back(std::chrono::duration<double, std::milli>(clock1 - clock0).count());
      res.contacts.push_back({t, depth, rep.contacts, rep.axis_fallbacks, pen});
    }
    last_recorded = false;
    const double tol = 1e-9 * protocol.sample_interval;
    if (depth + tol >= static_cast<double>(next_sample) * protocol.sample_interval) {
      res.record.append(frame_at(t));
      last_recorded = true;
      while (depth + tol >= static_cast<double>(next_sample) * protocol.sample_interval) ++next_sample;
    }
  }
  if (!last_recorded) res.record.append(frame_at(t));
  res.final_time = t;
  res.final_positions = sys.positions;
  return res;
}

ExperimentResult run_insertion_experiment(const SceneSpec& spec, const ExperimentOptions& options) {
  options.protocol.validate();
  const int repeats = options.protocol.repeats;
  ExperimentResult total;
  std::vector<double> all_ms;
  for (int k = 0; k < repeats; ++k) {
    ExperimentResult r = run_insertion(build_scene(spec, static_cast<std::uint64_t>(k)), options);
    all_ms.insert(all_ms.end(), r.step_ms.begin(), r.step_ms.end());
    if (k == 0) {
      total = std::move(r);
      continue;
    }
    if (r.record.frames.size() != total.record.frames.size())
      throw Error("repeat " + std::to_string(k) + " produced a different frame count");
    for (std::size_t f = 0; f < r.record.frames.size(); ++f) {
      auto& a = total.record.frames[f];
      const auto& b = r.record.frames[f];
      a.slab_avg_disp += b.slab_avg_disp;
      a.com_disp += b.com_disp;
      for (std::size_t s = 0; s < a.per_structure.size(); ++s) a.per_structure[s] += b.per_structure[s];
    }
    total.contacts = std::move(r.contacts);
    total.rest = std::move(r.rest);
    total.final_positions = std::move(r.final_positions);
    total.axis_fallbacks += r.axis_fallbacks;
    total.degenerate_cluster_fits += r.degenerate_cluster_fits;
    total.max_speed = std::max(total.max_speed, r.max_speed);
    total.max_penetration = std::max(total.max_penetration, r.max_penetration);
  }
  if (repeats > 1) {
    const double inv = 1.0 / repeats;
    for (auto& f : total.record.frames) {
      f.slab_avg_disp *= inv;
      f.com_disp *= inv;
      for (auto& v : f.per_structure) v *= inv;
    }
  }
  total.step_ms = std::move(all_ms);
  return total;
}

}  // namespace pbdsim::calibration
