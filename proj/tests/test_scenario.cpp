#include <doctest.h>

#include <sstream>

#include "pbdsim/cli/scenario.hpp"

using namespace pbdsim;
using namespace pbdsim::cli;

namespace {

const std::string kDataDir = PBDSIM_DATA_DIR;

std::string preamble() {
  return "[scene]\nparam_table = params/phantom.csv\n[mesh]\npath = meshes/phantom_box.obj\nunits_scale = 0.001\n"
         "structure = white_matter\n";
}

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in, "test.scenario", kDataDir);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("shipped scenarios load") {
  for (const char* name : {"phantom", "brain_synthetic", "ovine_synthetic"}) {
    const auto sc = load_scenario(kDataDir + "/scenarios/" + name + ".scenario");
    CHECK_FALSE(sc.meshes.empty());
    const auto spec = make_scene_spec(sc);
    CHECK(spec.meshes.size() == sc.meshes.size());
  }
  const auto ph = load_scenario(kDataDir + "/scenarios/phantom.scenario");
  CHECK(ph.experiment.rig.speed == 0.0005);
  CHECK(ph.experiment.sim.dt == doctest::Approx(1.0 / 60.0));
  CHECK(ph.experiment.protocol.depth_max == 0.0314);
  CHECK(ph.pinned_faces == std::vector<std::string>{"xmax", "ymin", "ymax", "zmin"});
  CHECK(ph.calibration_target == "white_matter");
  CHECK(ph.space.cluster_stiffness.resolution == 5);
}

TEST_CASE("scenario keys override defaults") {
  const auto sc = parse(preamble() +
                        "[catheter]\ndirection = 0, 0, 2\nspeed = 0.001\n[sim]\ndt = 0.01\nsolver_iterations = 7\n"
                        "policy = serial\n[protocol]\nrepeats = 3\n[calibration]\ncluster_stiffness = 0.1, 0.9\n");
  CHECK(sc.experiment.rig.direction == Vec3(0, 0, 1));
  CHECK(sc.experiment.rig.speed == 0.001);
  CHECK(sc.experiment.sim.dt == 0.01);
  CHECK(sc.experiment.sim.solver_iterations == 7);
  CHECK(sc.experiment.sim.policy == core::ExecPolicy::serial);
  CHECK(sc.experiment.protocol.repeats == 3);
  CHECK(sc.space.cluster_stiffness.lo == 0.1);
  CHECK(sc.space.cluster_stiffness.hi == 0.9);
  CHECK(sc.space.cluster_stiffness.resolution == 3);
}

TEST_CASE("scenario errors carry line numbers") {
  CHECK(error_of(preamble() + "[sim]\ndt = fast\n").find("test.scenario:8") != std::string::npos);
  CHECK(error_of(preamble() + "[sim]\nturbo = 1\n").find("unknown key") != std::string::npos);
  CHECK(error_of(preamble() + "[bogus]\n").find("test.scenario:7") != std::string::npos);
  CHECK(error_of(preamble() + "[sim]\nno equals sign\n").find("test.scenario:8") != std::string::npos);
  CHECK(error_of(preamble() + "[catheter]\nstart_tip = 1, 2\n").find("3 comma-separated") != std::string::npos);
  CHECK(error_of("key = 1\n").find("outside of a section") != std::string::npos);
  CHECK_FALSE(error_of(preamble() + "[sim]\nsolver_iterations = 2.5\n").empty());
}

TEST_CASE("missing files are reported by path") {
  const auto msg = error_of("[scene]\nparam_table = params/phantom.csv\n[mesh]\npath = meshes/missing.obj\n"
                            "structure = white_matter\n");
  CHECK(msg.find("meshes/missing.obj") != std::string::npos);
  CHECK(error_of("[mesh]\npath = meshes/phantom_box.obj\nstructure = a\n").find("param_table") != std::string::npos);
  CHECK_THROWS_AS(load_scenario("/nonexistent/x.scenario"), ConfigError);
}

TEST_CASE("probe specs parse and validate") {
  const auto p = load_probe_spec(kDataDir + "/probes/ovine.probes");
  CHECK(p.direction == Vec3(0, 0, -1));
  CHECK(p.hole_radius == 0.00125);
  CHECK(p.depth_start == 0.004);
  CHECK(p.depth_end == 0.016);
  std::istringstream bad("[probes]\nhole_radius = 0\n");
  CHECK_THROWS_AS(parse_probe_spec(bad, "bad.probes"), ConfigError);
  std::istringstream none("# nothing\n");
  CHECK_THROWS_AS(parse_probe_spec(none, "none.probes"), ConfigError);
}
