#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "pbdsim/calibration/calibrate.hpp"
#include "pbdsim/calibration/experiment.hpp"
#include "pbdsim/calibration/param_table.hpp"
#include "pbdsim/calibration/scene.hpp"

using namespace pbdsim;
using namespace pbdsim::calibration;

namespace {

const std::string kDataDir = PBDSIM_DATA_DIR;

// Smooth surrogate in which each parameter shapes a different part of the
// curve, so the generating parameters are identifiable. Cheap enough to search
// exhaustively in a unit test.
metrics::Curve surrogate(const shape::ClusterParams& p) {
  metrics::Curve c;
  for (int i = 0; i <= 20; ++i) {
    const double x = i / 20.0;
    c.depth.push_back(0.0314 * x);
    c.value.push_back(1e-5 * (x * x / (0.2 + p.cluster_stiffness) + 40.0 * p.cluster_radius * x +
                              20.0 * p.cluster_spacing * x * x * x * x));
  }
  return c;
}

ParamSpace small_space() {
  ParamSpace s;
  s.cluster_spacing = {0.005, 0.035, 3};
  s.cluster_radius = {0.0025, 0.035, 3};
  s.cluster_stiffness = {0.0, 1.0, 5};
  return s;
}

}  // namespace

TEST_CASE("shipped structure table carries the tabulated parameters") {
  const auto t = load_structure_params(kDataDir + "/params/table1.csv");
  CHECK(t.rows.size() == 11);
  CHECK(t.find("Gyri").cluster.cluster_stiffness == 0.002);
  CHECK(t.find("Amygdala").cluster.cluster_stiffness == 0.0005);
  CHECK(t.find("Brain Stem").particle_spacing == 0.007);
  CHECK(t.find("Pallidum").cluster.cluster_radius == 0.006);
  CHECK(t.find("Gyri").cluster.link_radius == 0.009);
}

TEST_CASE("parameter table errors") {
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_param_table(empty, "empty.csv"), ConfigError);
  std::istringstream header_only("name,particle_spacing,cluster_spacing_radius,cluster_stiffness,link_radius,"
                                 "link_stiffness\n");
  CHECK_THROWS_AS(parse_param_table(header_only, "h.csv"), ConfigError);
  std::istringstream stiff("name,particle_spacing,cluster_spacing_radius,cluster_stiffness,link_radius,"
                           "link_stiffness\nGyri,0.005,0.005,1.5,0.005,0.001\n");
  try {
    parse_param_table(stiff, "stiff.csv");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("stiff.csv:2") != std::string::npos);
  }
  std::istringstream dup("name,particle_spacing,cluster_spacing_radius,cluster_stiffness,link_radius,"
                         "link_stiffness\na,0.005,0.005,0.5,0.005,0.001\na,0.005,0.005,0.5,0.005,0.001\n");
  CHECK_THROWS_AS(parse_param_table(dup, "dup.csv"), ConfigError);
  CHECK_THROWS_AS(load_structure_params("/nonexistent/table.csv"), ConfigError);
}

TEST_CASE("parameter tables round-trip in split-column form") {
  const auto t = load_structure_params(kDataDir + "/params/table1.csv");
  std::stringstream ss;
  write_param_table(ss, t);
  const auto back = parse_param_table(ss, "rt.csv");
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(back.rows[i].name == t.rows[i].name);
    CHECK(back.rows[i].particle_spacing == t.rows[i].particle_spacing);
    CHECK(back.rows[i].cluster.cluster_spacing == t.rows[i].cluster.cluster_spacing);
    CHECK(back.rows[i].cluster.cluster_radius == t.rows[i].cluster.cluster_radius);
    CHECK(back.rows[i].cluster.cluster_stiffness == t.rows[i].cluster.cluster_stiffness);
  }
}

TEST_CASE("a scene mesh naming an unknown structure fails at build") {
  auto spec = fixture::phantom_spec();
  spec.meshes[0].structure = "grey_matter";
  CHECK_THROWS_AS(build_scene(spec), ConfigError);
  spec = fixture::phantom_spec();
  spec.pinned_faces = {"top"};
  CHECK_THROWS_AS(build_scene(spec), ConfigError);
}

TEST_CASE("phantom scene has the expected particle, pinning and constraint structure") {
  const auto scene = build_scene(fixture::phantom_spec());
  CHECK(scene.system.count() == 980);
  REQUIRE(scene.structures.size() == 1);
  CHECK(scene.structures[0].particles.size() == 980);
  // Pinned faces xmax, ymin, ymax, zmin of a 20x7x7 lattice: count by brute force.
  std::size_t pinned = 0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 7; ++j)
      for (int k = 0; k < 7; ++k) pinned += (i == 19 || j == 0 || j == 6 || k == 0);
  CHECK(scene.pinned_count == pinned);
  std::size_t zero_mass = 0;
  for (double w : scene.system.inv_mass) zero_mass += w == 0.0;
  CHECK(zero_mass == pinned);
  CHECK_FALSE(scene.constraints.clusters.empty());
  CHECK_FALSE(scene.constraints.links.empty());
}

TEST_CASE("grid points respect the radius rule, the cap and uniqueness") {
  const auto space = small_space();
  for (std::size_t cap : {1u, 5u, 20u, 100u}) {
    const auto pts = grid_points(space, cap);
    CHECK(pts.size() <= cap);
    CHECK_FALSE(pts.empty());
    std::set<std::array<double, kParamDims>> seen;
    for (const auto& p : pts) {
      CHECK(p.cluster_radius >= p.cluster_spacing / 2 - 1e-15);
      std::array<double, kParamDims> k{};
      for (int d = 0; d < kParamDims; ++d) k[d] = param_value(p, d);
      CHECK(seen.insert(k).second);
    }
  }
}

TEST_CASE("budget 1 evaluates a single point and returns it") {
  const auto ref = surrogate({0.02, 0.02, 0.5, 0.0025, 0.001});
  CalibrationOptions opt;
  opt.budget = 1;
  const auto r = calibrate(small_space(), ref, surrogate, opt);
  REQUIRE(r.trace.size() == 1);
  CHECK(r.best_index == 0);
  CHECK(r.best_score_pct == r.trace[0].score_pct);
  CHECK(r.best.cluster_stiffness == r.trace[0].params.cluster_stiffness);
  opt.budget = 0;
  CHECK_THROWS_AS(calibrate(small_space(), ref, surrogate, opt), ConfigError);
}

TEST_CASE("generate-then-recover on a synthetic objective") {
  const shape::ClusterParams truth{0.017, 0.013, 0.37, 0.0025, 0.001};
  const auto ref = surrogate(truth);
  const auto r = calibrate(small_space(), ref, surrogate, {});
  CHECK(r.trace.size() <= 200);
  CHECK(std::abs(r.best.cluster_stiffness - truth.cluster_stiffness) <= 0.1);
  CHECK(r.best_score_pct < 2.0);
  // The search never does worse than its best grid point.
  double grid_best = INFINITY;
  for (const auto& e : r.trace)
    if (e.phase == "grid") grid_best = std::min(grid_best, e.score_pct);
  CHECK(r.best_score_pct <= grid_best);
}

TEST_CASE("a zero reference is matched best at maximum stiffness with a monotone trend") {
  metrics::Curve zero{{0.0, 0.0314}, {0.0, 0.0}};
  auto space = small_space();
  space.cluster_spacing = {0.01, 0.01, 1};
  space.cluster_radius = {0.01, 0.01, 1};
  const auto r = calibrate(space, zero, surrogate, {});
  CHECK(r.best.cluster_stiffness == doctest::Approx(1.0));
  std::vector<std::pair<double, double>> grid;
  for (const auto& e : r.trace)
    if (e.phase == "grid") grid.emplace_back(e.params.cluster_stiffness, e.score_pct);
  std::sort(grid.begin(), grid.end());
  REQUIRE(grid.size() == 5);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i].second < grid[i - 1].second);
}

TEST_CASE("calibration traces are deterministic and round-trip through CSV") {
  const auto ref = surrogate({0.02, 0.02, 0.6, 0.0025, 0.001});
  const auto a = calibrate(small_space(), ref, surrogate, {});
  CalibrationOptions serial;
  serial.parallel = false;
  const auto b = calibrate(small_space(), ref, surrogate, serial);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].score_pct == b.trace[i].score_pct);
    for (int d = 0; d < kParamDims; ++d) CHECK(param_value(a.trace[i].params, d) == param_value(b.trace[i].params, d));
  }
  std::stringstream ss;
  write_trace_csv(ss, a.trace);
  const auto back = read_trace_csv(ss, "trace.csv");
  REQUIRE(back.size() == a.trace.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].phase == a.trace[i].phase);
    CHECK(back[i].score_pct == a.trace[i].score_pct);
  }
}

TEST_CASE("calibration fails when every evaluation is unstable") {
  const auto ref = surrogate({0.02, 0.02, 0.6, 0.0025, 0.001});
  Objective blowup = [](const shape::ClusterParams&) -> metrics::Curve {
    throw InstabilityError("synthetic blow-up", 3, "prediction");
  };
  CalibrationOptions opt;
  opt.budget = 10;
  try {
    calibrate(small_space(), ref, blowup, opt);
    FAIL("expected InstabilityError");
  } catch (const InstabilityError& e) {
    CHECK(std::string(e.what()).find("cluster_stiffness") != std::string::npos);
  }
  // Partially unstable searches still succeed and record the failures.
  Objective partial = [](const shape::ClusterParams& p) {
    if (p.cluster_stiffness < 0.3) throw InstabilityError("too soft");
    return surrogate(p);
  };
  const auto r = calibrate(small_space(), ref, partial, {});
  CHECK(r.best.cluster_stiffness >= 0.3);
  bool saw_unstable = false;
  for (const auto& e : r.trace) saw_unstable |= e.status == "unstable";
  CHECK(saw_unstable);
}

TEST_CASE("depth_max 0 records a single frame at depth 0") {
  auto opt = fixture::phantom_options();
  opt.protocol.depth_max = 0.0;
  const auto r = run_insertion_experiment(fixture::phantom_spec(), opt);
  REQUIRE(r.record.frames.size() == 1);
  CHECK(r.record.frames[0].depth == 0.0);
  CHECK(r.record.frames[0].slab_avg_disp == 0.0);
}

TEST_CASE("repeated insertions with identical config give identical records") {
  auto opt = fixture::phantom_options();
  opt.protocol.depth_max = 0.004;
  opt.protocol.measurement_depth = 0.004;
  opt.protocol.sample_interval = 0.001;
  opt.protocol.repeats = 1;
  const auto first = run_insertion_experiment(fixture::phantom_spec(), opt);
  REQUIRE(first.record.frames.size() >= 5);
  bool any_motion = false;
  for (const auto& f : first.record.frames) any_motion |= f.slab_avg_disp > 0.0;
  CHECK(any_motion);
  for (int k = 1; k < 8; ++k) {
    const auto again = run_insertion_experiment(fixture::phantom_spec(), opt);
    REQUIRE(again.record.frames.size() == first.record.frames.size());
    for (std::size_t i = 0; i < again.record.frames.size(); ++i) {
      CHECK(again.record.frames[i].depth == first.record.frames[i].depth);
      CHECK(again.record.frames[i].slab_avg_disp == first.record.frames[i].slab_avg_disp);
    }
  }
  // Averaging eight noise-free repeats changes nothing.
  opt.protocol.repeats = 8;
  const auto avg = run_insertion_experiment(fixture::phantom_spec(), opt);
  REQUIRE(avg.record.frames.size() == first.record.frames.size());
  for (std::size_t i = 0; i < avg.record.frames.size(); ++i)
    CHECK(avg.record.frames[i].slab_avg_disp == doctest::Approx(first.record.frames[i].slab_avg_disp).epsilon(1e-12));
}

TEST_CASE("insertion depth is non-decreasing and reaches depth_max") {
  auto opt = fixture::phantom_options();
  opt.protocol.depth_max = 0.006;
  opt.protocol.measurement_depth = 0.006;
  const auto r = run_insertion_experiment(fixture::phantom_spec(), opt);
  for (std::size_t i = 1; i < r.record.frames.size(); ++i)
    CHECK(r.record.frames[i].depth >= r.record.frames[i - 1].depth);
  CHECK(r.record.frames.back().depth >= 0.006 - 1e-12);
  CHECK(r.max_penetration < 1e-9);
}

TEST_CASE("an oversize time step trips the instability guard") {
  auto opt = fixture::phantom_options();
  opt.sim.dt = 10.0;
  CHECK_THROWS_AS(run_insertion_experiment(fixture::phantom_spec(), opt), InstabilityError);
}

TEST_CASE("a catheter that starts inside free tissue is a configuration error") {
  auto opt = fixture::phantom_options();
  opt.rig.start_tip = {-0.022, 0.0004, 0.0003};
  CHECK_THROWS_AS(run_insertion_experiment(fixture::phantom_spec(), opt), ConfigError);
}
