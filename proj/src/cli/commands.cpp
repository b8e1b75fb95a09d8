#include "pbdsim/cli/commands.hpp"

#include <omp.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>

#include "pbdsim/calibration/calibrate.hpp"
#include "pbdsim/calibration/experiment.hpp"
#include "json.hpp"
#include "pbdsim/cli/scenario.hpp"
#include "pbdsim/io/csv.hpp"
#include "pbdsim/metrics/metrics.hpp"
#include "pbdsim/metrics/records.hpp"

namespace pbdsim::cli {

namespace {

namespace fs = std::filesystem;
using io::format_double;
using nlohmann::json;

int guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const InstabilityError& e) {
    err << "error: simulation unstable: " << e.what() << '\n';
    return kExitInstability;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::ofstream f(dir / name);
  if (!f) throw ConfigError("cannot write " + (dir / name).string());
  return f;
}

// JSON has no inf/nan; they are written as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

int cmd_run(const fs::path& scenario_path, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_scenario(scenario_path);
    const auto spec = make_scene_spec(sc);
    const auto res = calibration::run_insertion_experiment(spec, sc.experiment);

    {
      auto f = open_out(out_dir, "record.csv");
      metrics::write_record_csv(f, res.record);
    }
    {
      auto f = open_out(out_dir, "contacts.csv");
      metrics::write_contacts_csv(f, res.contacts);
    }
    {
      auto f = open_out(out_dir, "field.csv");
      metrics::write_field_csv(f, metrics::make_field(res.rest, res.final_positions));
    }

    const auto lat = calibration::latency_stats(res.step_ms);
    const auto& last = res.record.frames.back();
    json s;
    s["scenario"] = fs::path(scenario_path).filename().string();
    s["particles"] = res.particles;
    s["clusters"] = res.clusters;
    s["links"] = res.links;
    s["pinned"] = res.pinned;
    s["slab_particles"] = res.slab_particles;
    s["steps"] = res.steps;
    s["repeats"] = sc.experiment.protocol.repeats;
    s["threads"] = omp_get_max_threads();
    json fin;
    fin["time"] = last.time;
    fin["depth"] = last.depth;
    fin["slab_avg_disp"] = last.slab_avg_disp;
    fin["com_disp"] = last.com_disp;
    for (std::size_t i = 0; i < res.record.structures.size(); ++i)
      fin["per_structure"][res.record.structures[i]] = last.per_structure[i];
    s["final"] = fin;
    s["step_latency_ms"] = {{"mean", lat.mean_ms}, {"p95", lat.p95_ms}, {"max", lat.max_ms}, {"steps", lat.steps}};
    s["max_speed"] = res.max_speed;
    s["max_penetration"] = num(res.max_penetration);
    s["axis_fallbacks"] = res.axis_fallbacks;
    s["degenerate_cluster_fits"] = res.degenerate_cluster_fits;
    {
      auto f = open_out(out_dir, "summary.json");
      f << s.dump(2) << '\n';
    }
    out << "frames " << res.record.frames.size() << ", final depth " << format_double(last.depth)
        << " m, slab displacement " << format_double(last.slab_avg_disp) << " m, mean step "
        << format_double(lat.mean_ms) << " ms\n";
  });
}

int cmd_calibrate(const fs::path& scenario_path, const fs::path& reference, long long budget, const fs::path& out_dir,
                  std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (budget < 1) throw ConfigError("--budget must be >= 1");
    if (budget > std::numeric_limits<int>::max()) throw ConfigError("--budget is too large");
    const Scenario sc = load_scenario(scenario_path);
    const auto ref = metrics::read_reference_curve_file(reference);
    const auto spec = make_scene_spec(sc);
    calibration::CalibrationOptions opts;
    opts.budget = static_cast<int>(budget);
    opts.min_step_fraction = sc.min_step_fraction;
    const auto objective = calibration::make_experiment_objective(spec, sc.calibration_target, sc.experiment);
    const auto result = calibration::calibrate(sc.space, ref, objective, opts);
    {
      auto f = open_out(out_dir, "trace.csv");
      calibration::write_trace_csv(f, result.trace);
    }
    {
      calibration::StructureParamTable best;
      auto row = calibration::effective_params(spec, sc.calibration_target);
      row.cluster = result.best;
      best.rows.push_back(row);
      auto f = open_out(out_dir, "best_params.csv");
      calibration::write_param_table(f, best);
    }
    out << "evaluations " << result.trace.size() << ", best index " << result.best_index << '\n';
    out << "best score " << format_double(result.best_score_pct) << " % (rmse " << format_double(result.best_rmse_m)
        << " m) at cluster_spacing " << format_double(result.best.cluster_spacing) << ", cluster_radius "
        << format_double(result.best.cluster_radius) << ", cluster_stiffness "
        << format_double(result.best.cluster_stiffness) << ", link_radius " << format_double(result.best.link_radius)
        << ", link_stiffness " << format_double(result.best.link_stiffness) << '\n';
  });
}

int cmd_validate(const fs::path& scenario_path, const fs::path& probes, const fs::path& field_path,
                 const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_scenario(scenario_path);
    const auto probe_spec = load_probe_spec(probes);
    std::ifstream fin(field_path);
    if (!fin) throw ConfigError("cannot open reference field " + field_path.string());
    const metrics::FieldLookup ref(metrics::read_field_csv(fin, field_path.string()));
    const auto spec = make_scene_spec(sc);
    const auto res = calibration::run_insertion_experiment(spec, sc.experiment);

    double spacing = std::numeric_limits<double>::infinity();
    for (const auto& m : spec.meshes) spacing = std::min(spacing, spec.table.find(m.structure).particle_spacing);
    const auto sim = metrics::sample_hole_perimeter(probe_spec, res.rest, res.final_positions, spacing);

    std::vector<metrics::ValidationRow> rows;
    metrics::Curve sim_curve, ref_curve;
    std::vector<double> ref_sum(metrics::kProbeStations, 0.0);
    std::vector<int> ref_n(metrics::kProbeStations, 0);
    for (const auto& s : sim.samples) {
      const Vec3& at = res.rest[s.particle];
      const auto& row = ref.row(ref.nearest(at, 2.0 * spacing));
      metrics::ValidationRow v;
      v.plane = s.point.plane;
      v.side = s.point.side;
      v.station = s.point.station;
      v.position = s.point.rest_position;
      v.sim_disp = s.magnitude;
      v.ref_disp = row.displacement.norm();
      const double diff = std::abs(v.ref_disp - v.sim_disp);
      v.rel_error = v.sim_disp > 0.0 ? diff / v.sim_disp
                                     : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN());
      ref_sum[v.station - 1] += v.ref_disp;
      ++ref_n[v.station - 1];
      rows.push_back(v);
    }
    const auto sim_means = sim.station_means();
    for (int k = 0; k < metrics::kProbeStations; ++k) {
      const double d =
          probe_spec.depth_start + (probe_spec.depth_end - probe_spec.depth_start) * k / (metrics::kProbeStations - 1);
      sim_curve.depth.push_back(d);
      sim_curve.value.push_back(sim_means[k]);
      ref_curve.depth.push_back(d);
      ref_curve.value.push_back(ref_n[k] ? ref_sum[k] / ref_n[k] : 0.0);
    }
    const auto m = metrics::mismatch_score(sim_curve, ref_curve);
    {
      auto f = open_out(out_dir, "validation.csv");
      metrics::write_validation_csv(f, rows);
    }
    out << "probes " << rows.size() << ", mean simulated displacement " << format_double(sim.mean_displacement)
        << " m\n";
    out << "mismatch " << format_double(m.mse_pct) << " % (rmse " << format_double(m.rmse_m) << " m)\n";
  });
}

}  // namespace pbdsim::cli
