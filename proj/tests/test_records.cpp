#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pbdsim/metrics/records.hpp"

using namespace pbdsim;
using namespace pbdsim::metrics;

TEST_CASE("insertion records round-trip exactly through CSV") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1e-3);
  InsertionRecord rec;
  rec.structures = {"Gyri", "Brain Stem"};
  double t = 0.0;
  for (int i = 0; i < 30; ++i) {
    t += u(rng) + 1e-6;
    rec.append({t, t * 0.0005, u(rng), u(rng), {u(rng), u(rng)}});
  }
  std::stringstream ss;
  write_record_csv(ss, rec);
  const auto back = read_record_csv(ss, "rec.csv");
  CHECK(back.structures == rec.structures);
  REQUIRE(back.frames.size() == rec.frames.size());
  for (std::size_t i = 0; i < rec.frames.size(); ++i) {
    CHECK(back.frames[i].time == rec.frames[i].time);
    CHECK(back.frames[i].depth == rec.frames[i].depth);
    CHECK(back.frames[i].slab_avg_disp == rec.frames[i].slab_avg_disp);
    CHECK(back.frames[i].com_disp == rec.frames[i].com_disp);
    CHECK(back.frames[i].per_structure == rec.frames[i].per_structure);
  }
  const auto curve = rec.slab_curve();
  CHECK(curve.size() == rec.frames.size());
}

TEST_CASE("records reject inconsistent frames and headers") {
  InsertionRecord rec;
  rec.structures = {"a"};
  CHECK_THROWS_AS(rec.append({0.0, 0.0, 0.0, 0.0, {}}), ConfigError);
  rec.append({1.0, 0.0, 0.0, 0.0, {0.0}});
  CHECK_THROWS_AS(rec.append({1.0, 0.0, 0.0, 0.0, {0.0}}), ConfigError);
  std::istringstream bad("when,depth,slab_avg_disp,com_disp\n0,0,0,0\n");
  CHECK_THROWS_AS(read_record_csv(bad, "bad.csv"), ParseError);
  std::istringstream cell("time,depth,slab_avg_disp,com_disp\n0,0,x,0\n");
  try {
    read_record_csv(cell, "cell.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("cell.csv:2") != std::string::npos);
  }
}

TEST_CASE("contact logs round-trip") {
  std::vector<ContactRow> rows = {{0.0, 0.0, 0, 0, -0.001}, {0.016, 8e-6, 12, 1, 3.5e-17}};
  std::stringstream ss;
  write_contacts_csv(ss, rows);
  const auto back = read_contacts_csv(ss, "c.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].contacts == 12);
  CHECK(back[1].axis_fallbacks == 1);
  CHECK(back[1].max_penetration == rows[1].max_penetration);
  CHECK(back[0].max_penetration == rows[0].max_penetration);
}

TEST_CASE("displacement fields round-trip and support bounded nearest lookup") {
  std::mt19937_64 rng(9);
  std::vector<Vec3> rest, cur;
  for (int i = 0; i < 50; ++i) {
    rest.push_back(oracle::random_vec(rng, 0.01));
    cur.push_back(rest.back() + oracle::random_vec(rng, 1e-4));
  }
  const auto field = make_field(rest, cur);
  std::stringstream ss;
  write_field_csv(ss, field);
  const auto back = read_field_csv(ss, "f.csv");
  REQUIRE(back.size() == field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    CHECK(back[i].position == rest[i]);
    CHECK(back[i].displacement == field[i].displacement);
  }
  FieldLookup lookup(back);
  for (std::size_t i = 0; i < rest.size(); i += 7) CHECK(lookup.nearest(rest[i] + Vec3(1e-9, 0, 0), 1e-6) == i);
  CHECK_THROWS_AS(lookup.nearest(Vec3(1, 1, 1), 1e-3), ConfigError);
  CHECK_THROWS_AS(FieldLookup({}), ConfigError);
}

TEST_CASE("reference curves round-trip and need two increasing points") {
  const Curve c{{0.0, 0.001, 0.0025}, {0.0, 1.5e-6, 4e-6}};
  std::stringstream ss;
  write_reference_curve(ss, c);
  const auto back = read_reference_curve(ss, "ref.csv");
  CHECK(back.depth == c.depth);
  CHECK(back.value == c.value);
  std::istringstream one("depth_m,displacement_m\n0.01,1e-5\n");
  CHECK_THROWS_AS(read_reference_curve(one, "one.csv"), ConfigError);
  std::istringstream dec("depth_m,displacement_m\n0.01,1e-5\n0.005,1e-5\n");
  CHECK_THROWS_AS(read_reference_curve(dec, "dec.csv"), ConfigError);
  CHECK_THROWS_AS(read_reference_curve_file("/nonexistent/ref.csv"), ConfigError);
}

TEST_CASE("validation rows round-trip including nan relative error") {
  std::vector<ValidationRow> rows = {{"xz", 1, 3, {0.001, 0.002, 0.003}, 1e-5, 1.1e-5, 0.1},
                                     {"yz", 4, 5, {0, 0, 0}, 0.0, 2e-6, std::nan("")}};
  std::stringstream ss;
  write_validation_csv(ss, rows);
  const auto back = read_validation_csv(ss, "v.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].plane == "xz");
  CHECK(back[0].side == 1);
  CHECK(back[0].station == 3);
  CHECK(back[0].position == rows[0].position);
  CHECK(back[0].rel_error == rows[0].rel_error);
  CHECK(std::isnan(back[1].rel_error));
}
