#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pbdsim/catheter/capsule.hpp"

using namespace pbdsim;
using catheter::CapsulePose;
using catheter::CatheterRig;

namespace {

// Closest point on segment [a,b], computed independently of the library.
Vec3 segment_closest(const Vec3& a, const Vec3& b, const Vec3& p) {
  const Vec3 ab = b - a;
  double t = (p - a).dot(ab) / ab.squaredNorm();
  t = std::clamp(t, 0.0, 1.0);
  return a + t * ab;
}

CapsulePose x_capsule() {
  CatheterRig rig;
  rig.radius = 0.00125;
  rig.start_tip = Vec3::Zero();
  rig.direction = Vec3::UnitX();
  rig.shaft_length = 0.1;
  return catheter::pose_at(rig, 0.0);
}

std::vector<double> free_masses(std::size_t n) { return std::vector<double>(n, 1.0); }

}  // namespace

TEST_CASE("catheter pose follows the kinematic insertion law") {
  CatheterRig rig;
  rig.speed = 0.0005;
  rig.start_tip = Vec3(0.01, 0.02, 0.03);
  rig.direction = Vec3(0, 1, 0);
  const auto p10 = catheter::pose_at(rig, 10.0);
  CHECK((p10.tip - rig.start_tip - Vec3(0, 0.005, 0)).norm() < 1e-15);
  CHECK((p10.tip - p10.tail).norm() == doctest::Approx(rig.shaft_length));
  CHECK((p10.tip - p10.tail).normalized().dot(rig.direction) == doctest::Approx(1.0));
  CHECK(catheter::pose_at(rig, 0.0).tip == rig.start_tip);
  rig.speed = 0.0;
  CHECK(catheter::pose_at(rig, 123.4).tip == catheter::pose_at(rig, 0.0).tip);
  rig.speed = -1.0;
  CHECK_THROWS_AS(rig.validate(), ConfigError);
}

TEST_CASE("particles outside the capsule are untouched") {
  const auto pose = x_capsule();
  const std::vector<Vec3> p = {{-0.01, 0.002, 0.0}};
  const auto r = catheter::project_collisions(pose, p, free_masses(1));
  CHECK(r.contacts == 0);
  CHECK(r.corrections[0] == Vec3::Zero());
}

TEST_CASE("a particle 0.5 mm from the axis moves to the surface at the same station") {
  const auto pose = x_capsule();
  const std::vector<Vec3> p = {{-0.01, 0.0005, 0.0}};
  const auto r = catheter::project_collisions(pose, p, free_masses(1));
  CHECK(r.contacts == 1);
  const Vec3 out = p[0] + r.corrections[0];
  CHECK(out.x() == doctest::Approx(-0.01));
  CHECK(std::hypot(out.y(), out.z()) == doctest::Approx(0.00125));
}

TEST_CASE("a particle beyond the tip is pushed out along the tip ray") {
  const auto pose = x_capsule();
  const Vec3 dir = Vec3(1, 1, 0.5).normalized();
  const std::vector<Vec3> p = {pose.tip + 0.001 * dir};
  const auto r = catheter::project_collisions(pose, p, free_masses(1));
  const Vec3 out = p[0] + r.corrections[0];
  CHECK((out - pose.tip).norm() == doctest::Approx(0.00125));
  CHECK((out - pose.tip).normalized().dot(dir) == doctest::Approx(1.0));
}

TEST_CASE("projection is idempotent, radial and leaves no particle inside") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    CatheterRig rig;
    rig.radius = 0.0005 + 0.002 * std::abs(u(rng));
    rig.start_tip = oracle::random_vec(rng, 0.01);
    rig.direction = oracle::random_vec(rng, 1.0).normalized();
    rig.shaft_length = 0.02;
    rig.speed = 0.001;
    const auto pose = catheter::pose_at(rig, 5 * std::abs(u(rng)));
    const double margin = trial % 3 == 0 ? 0.0002 : 0.0;
    std::vector<Vec3> p(8);
    for (auto& x : p) x = segment_closest(pose.tail, pose.tip, pose.tip + oracle::random_vec(rng, 0.02)) +
                          oracle::random_vec(rng, 0.004);
    const auto first = catheter::project_collisions(pose, p, free_masses(p.size()), margin);
    std::vector<Vec3> q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      q[i] = p[i] + first.corrections[i];
      const Vec3 c = segment_closest(pose.tail, pose.tip, p[i]);
      const double d = (q[i] - segment_closest(pose.tail, pose.tip, q[i])).norm();
      CHECK(d >= rig.radius + margin - 1e-12);
      if (first.corrections[i] != Vec3::Zero()) {
        // Correction lies along the ray from the closest axis point.
        CHECK(first.corrections[i].cross(p[i] - c).norm() <= 1e-9 * first.corrections[i].norm());
      }
    }
    const auto second = catheter::project_collisions(pose, q, free_masses(q.size()), margin);
    for (const auto& c : second.corrections) CHECK(c.norm() < 1e-12);
  }
}

TEST_CASE("pinned particles inside the capsule are left alone") {
  const auto pose = x_capsule();
  const std::vector<Vec3> p = {{-0.01, 0.0005, 0.0}};
  const auto r = catheter::project_collisions(pose, p, std::vector<double>{0.0});
  CHECK(r.contacts == 0);
  CHECK(r.corrections[0] == Vec3::Zero());
  CHECK(catheter::max_penetration(pose, p, std::vector<double>{0.0}) <= 0.0);
  CHECK(catheter::max_penetration(pose, p, std::vector<double>{1.0}) == doctest::Approx(0.00075));
}

TEST_CASE("an on-axis particle is pushed along a fixed perpendicular and counted") {
  const auto pose = x_capsule();
  const std::vector<Vec3> p = {{-0.01, 0.0, 0.0}, {-0.02, 0.0, 0.0}};
  const auto r = catheter::project_collisions(pose, p, free_masses(2));
  CHECK(r.contacts == 2);
  CHECK(r.axis_fallbacks == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r.corrections[i].norm() == doctest::Approx(0.00125));
    CHECK(std::abs(r.corrections[i].x()) < 1e-15);
  }
  CHECK((r.corrections[0] - r.corrections[1]).norm() < 1e-15);
  const Vec3 perp = catheter::fallback_perpendicular(Vec3::UnitX());
  CHECK(std::abs(perp.dot(Vec3::UnitX())) < 1e-15);
  CHECK(perp.norm() == doctest::Approx(1.0));
}
