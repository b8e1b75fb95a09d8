#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "pbdsim/core/solver.hpp"
#include "pbdsim/shape/clusters.hpp"
#include "pbdsim/shape/links.hpp"

using namespace pbdsim;
using core::ConstraintSet;
using core::ParticleSystem;
using core::SimConfig;

namespace {

SimConfig undamped() {
  SimConfig c;
  c.damping = 0.0;
  return c;
}

// Block of particles with clusters, links and a catheter pushing through it.
struct Block {
  ParticleSystem sys;
  ConstraintSet cs;

  explicit Block(double s = 0.0025, int nx = 8, int ny = 5, int nz = 5) {
    std::vector<Vec3> p;
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j)
        for (int k = 0; k < nz; ++k) p.emplace_back(i * s, (j - ny / 2) * s, (k - nz / 2) * s);
    sys = ParticleSystem::from_positions(p);
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i].x() > (nx - 1.5) * s) sys.inv_mass[i] = 0.0;
    cs.clusters = shape::build_clusters(p, {2 * s, 1.5 * s, 0.3, 1.5 * s, 0.2});
    cs.links = shape::build_links(p, 1.5 * s, 0.2);
    core::CapsuleContact contact;
    contact.rig.start_tip = Vec3(-0.001, 0.0003, 0.0002);
    contact.rig.speed = 0.01;
    cs.contact = contact;
  }
};

bool same_bits(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int k = 0; k < 3; ++k)
      if (std::memcmp(&a[i][k], &b[i][k], sizeof(double)) != 0) return false;
  return true;
}

}  // namespace

TEST_CASE("a resting free particle stays put") {
  auto sys = ParticleSystem::from_positions(std::vector<Vec3>{{0.1, 0.2, 0.3}});
  core::Solver solver({}, 1);
  for (int i = 0; i < 100; ++i) solver.step(sys, SimConfig{}, i / 60.0);
  CHECK(sys.positions[0] == Vec3(0.1, 0.2, 0.3));
}

TEST_CASE("ballistic particle advances by v dt") {
  auto sys = ParticleSystem::from_positions(std::vector<Vec3>{Vec3::Zero()});
  sys.velocities[0] = Vec3(1, 0, 0);
  SimConfig c = undamped();
  c.dt = 0.01;
  const auto rep = core::step(sys, {}, c);
  CHECK((sys.positions[0] - Vec3(0.01, 0, 0)).norm() < 1e-15);
  CHECK(rep.max_position_delta == doctest::Approx(0.01));

  auto sub = ParticleSystem::from_positions(std::vector<Vec3>{Vec3::Zero()});
  sub.velocities[0] = Vec3(1, 0, 0);
  c.substeps = 4;
  core::step(sub, {}, c);
  CHECK((sub.positions[0] - Vec3(0.01, 0, 0)).norm() < 1e-15);
}

TEST_CASE("stretched link of rest length 1 placed 2 apart contracts to 1") {
  auto sys = ParticleSystem::from_positions(std::vector<Vec3>{{0, 0, 0}, {2, 0, 0}});
  ConstraintSet cs;
  cs.links.push_back({0, 1, 1.0, 1.0});
  SimConfig c;
  c.solver_iterations = 20;
  core::step(sys, cs, c);
  CHECK(std::abs((sys.positions[1] - sys.positions[0]).norm() - 1.0) < 1e-3);
  CHECK((sys.positions[0] - Vec3(0.5, 0, 0)).norm() < 1e-9);
}

TEST_CASE("fully pinned body is unchanged by any constraint set") {
  Block b;
  std::fill(b.sys.inv_mass.begin(), b.sys.inv_mass.end(), 0.0);
  for (auto& p : b.sys.positions) p += Vec3(0.0001, 0, 0) * p.y();  // off rest
  b.sys.predicted = b.sys.positions;
  const auto before = b.sys.positions;
  core::Solver solver(b.cs, b.sys.count());
  for (int i = 0; i < 20; ++i) solver.step(b.sys, SimConfig{}, i / 60.0);
  CHECK(same_bits(before, b.sys.positions));
}

TEST_CASE("momentum is conserved without constraints, gravity or damping") {
  std::mt19937_64 rng(1);
  std::vector<Vec3> p;
  for (int i = 0; i < 50; ++i) p.push_back(oracle::random_vec(rng, 1.0));
  auto sys = ParticleSystem::from_positions(p);
  for (auto& v : sys.velocities) v = oracle::random_vec(rng, 2.0);
  const Vec3 m0 = sys.momentum();
  core::Solver solver({}, sys.count());
  for (int i = 0; i < 50; ++i) {
    solver.step(sys, undamped(), i / 60.0);
    CHECK((sys.momentum() - m0).norm() < 1e-12 * (1 + m0.norm()));
  }
}

TEST_CASE("link residual norm never grows across solver iterations") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(u(rng) * 8);
    std::vector<Vec3> rest;
    for (int i = 0; i < n; ++i) rest.push_back(oracle::random_vec(rng, 1.0));
    ConstraintSet cs;
    cs.links = shape::build_links(rest, 1.2, 0.2 + 0.8 * u(rng));
    if (cs.links.empty()) continue;
    auto sys = ParticleSystem::from_positions(rest);
    for (auto& p : sys.positions) p += oracle::random_vec(rng, 0.05);
    SimConfig c = undamped();
    c.solver_iterations = 10;
    c.track_residuals = true;
    const auto rep = core::step(sys, cs, c);
    REQUIRE(rep.link_residual_history.size() == 11);
    for (std::size_t i = 1; i < rep.link_residual_history.size(); ++i)
      CHECK(rep.link_residual_history[i] <= rep.link_residual_history[i - 1] * (1 + 1e-12) + 1e-15);
  }
}

TEST_CASE("serial and parallel kernels are bitwise identical for any thread count") {
  Block ref;
  core::Solver serial(ref.cs, ref.sys.count());
  SimConfig cs;
  cs.policy = core::ExecPolicy::serial;
  for (int i = 0; i < 120; ++i) serial.step(ref.sys, cs, i / 60.0);

  const int saved = omp_get_max_threads();
  for (int threads : {1, 2, 3, 4}) {
    omp_set_num_threads(threads);
    Block par;
    core::Solver parallel(par.cs, par.sys.count());
    SimConfig cp;
    cp.policy = core::ExecPolicy::parallel;
    core::StepReport rep;
    for (int i = 0; i < 120; ++i) rep = parallel.step(par.sys, cp, i / 60.0);
    CHECK(same_bits(ref.sys.positions, par.sys.positions));
    CHECK(same_bits(ref.sys.velocities, par.sys.velocities));
  }
  omp_set_num_threads(saved);
}

TEST_CASE("repeated runs are bit-identical and the catheter actually deforms the block") {
  Block a, b;
  core::Solver sa(a.cs, a.sys.count()), sb(b.cs, b.sys.count());
  std::size_t contacts = 0;
  for (int i = 0; i < 120; ++i) {
    contacts += sa.step(a.sys, SimConfig{}, i / 60.0).contacts;
    sb.step(b.sys, SimConfig{}, i / 60.0);
  }
  CHECK(same_bits(a.sys.positions, b.sys.positions));
  CHECK(contacts > 0);
  double moved = 0.0;
  for (std::size_t i = 0; i < a.sys.count(); ++i) moved = std::max(moved, a.sys.velocities[i].norm());
  CHECK(moved > 0.0);
}

TEST_CASE("non-finite state aborts the step naming particle and pass") {
  Block b;
  b.sys.velocities[7] = Vec3(std::numeric_limits<double>::quiet_NaN(), 0, 0);
  core::Solver solver(b.cs, b.sys.count());
  try {
    solver.step(b.sys, SimConfig{}, 0.0);
    FAIL("expected InstabilityError");
  } catch (const InstabilityError& e) {
    CHECK(e.particle() == 7);
    CHECK(e.stage() == "prediction");
  }

  // A NaN rest offset poisons the fit of every cluster holding particle 0.
  ConstraintSet cs;
  const std::vector<Vec3> rest = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  auto c = shape::ShapeCluster::from_rest({0, 1, 2, 3}, rest, 1.0);
  c.rest_positions[0].x() = std::numeric_limits<double>::infinity();
  cs.clusters.push_back(c);
  auto sys = ParticleSystem::from_positions(rest);
  try {
    core::step(sys, cs, SimConfig{});
    FAIL("expected InstabilityError");
  } catch (const InstabilityError& e) {
    CHECK(e.stage() == "shape matching");
    CHECK(e.constraint() == 0);
  }
}

TEST_CASE("invalid constraint sets and configs are rejected") {
  ConstraintSet cs;
  cs.links.push_back({0, 5, 1.0, 1.0});
  CHECK_THROWS_AS(core::Solver(cs, 2), ConfigError);
  SimConfig c;
  c.dt = 0.0;
  auto sys = ParticleSystem::from_positions(std::vector<Vec3>{Vec3::Zero()});
  CHECK_THROWS_AS(core::step(sys, {}, c), ConfigError);
  c = SimConfig{};
  c.solver_iterations = 0;
  CHECK_THROWS_AS(core::step(sys, {}, c), ConfigError);
  core::Solver s({}, 3);
  CHECK_THROWS_AS(s.step(sys, SimConfig{}, 0.0), ConfigError);
}

TEST_CASE("degenerate cluster fits are reported") {
  ConstraintSet cs;
  const std::vector<Vec3> line = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  cs.clusters.push_back(shape::ShapeCluster::from_rest({0, 1, 2}, line, 0.5));
  auto sys = ParticleSystem::from_positions(line);
  const auto rep = core::step(sys, cs, SimConfig{});
  CHECK(rep.degenerate_cluster_fits == 4);
  REQUIRE(rep.degenerate_clusters.size() == 1);
  CHECK(rep.degenerate_clusters[0] == 0);
}
