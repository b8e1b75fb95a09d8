#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pbdsim/calibration/calibrate.hpp"
#include "pbdsim/calibration/experiment.hpp"
#include "pbdsim/calibration/scene.hpp"
#include "pbdsim/metrics/metrics.hpp"

namespace pbdsim::cli {

/// `[section]` headers, `key = value` lines and `#` comments. Sections may
/// repeat; each occurrence is kept in file order.
struct IniSection {
  std::string name;
  std::size_t line = 0;
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::size_t> entry_lines;
};

std::vector<IniSection> parse_ini(std::istream& in, const std::string& source);

struct MeshEntry {
  std::filesystem::path path;  // resolved against the scenario directory
  double units_scale = 1.0;
  std::string structure;
};

struct Scenario {
  std::filesystem::path source;
  std::vector<MeshEntry> meshes;
  std::filesystem::path param_table;
  std::vector<std::string> pinned_faces;
  std::uint64_t seed = 0;
  double noise = 0.0;
  calibration::ExperimentOptions experiment;
  std::string calibration_target;  // defaults to the first mesh's structure
  calibration::ParamSpace space;
  double min_step_fraction = 1e-4;
};

/// Relative paths resolve against `base_dir`. Unknown sections or keys,
/// malformed values and missing referenced files raise ConfigError naming the
/// source line and field.
Scenario parse_scenario(std::istream& in, const std::string& source, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

/// Loads meshes and the parameter table.
calibration::SceneSpec make_scene_spec(const Scenario& scenario);

/// `[probes]` section with origin, direction, hole_radius, depth_start, depth_end.
metrics::ProbeSpec load_probe_spec(const std::filesystem::path& path);
metrics::ProbeSpec parse_probe_spec(std::istream& in, const std::string& source);

}  // namespace pbdsim::cli
