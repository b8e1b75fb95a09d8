#include "pbdsim/cli/scenario.hpp"

#include <fstream>
#include <functional>
#include <istream>

#include "pbdsim/geometry/mesh.hpp"
#include "pbdsim/io/csv.hpp"

namespace pbdsim::cli {

namespace {

namespace fs = std::filesystem;

struct Field {
  const std::string& source;
  const IniSection& section;
  std::size_t i;

  const std::string& key() const { return section.entries[i].first; }
  const std::string& value() const { return section.entries[i].second; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source + ":" + std::to_string(section.entry_lines[i]) + ": [" + section.name + "] " + key() +
                      ": " + msg);
  }
  double number() const {
    double v = 0.0;
    if (!io::parse_double(value(), v) || !std::isfinite(v)) fail("expected a number, got '" + value() + "'");
    return v;
  }
  long long integer() const {
    const double v = number();
    if (v != std::floor(v)) fail("expected an integer, got '" + value() + "'");
    return static_cast<long long>(v);
  }
  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const auto& part : io::split(value(), ',')) {
      double v = 0.0;
      if (!io::parse_double(part, v) || !std::isfinite(v)) fail("bad number '" + io::trim(part) + "'");
      out.push_back(v);
    }
    return out;
  }
  Vec3 vec3() const {
    const auto v = numbers();
    if (v.size() != 3) fail("expected 3 comma-separated numbers");
    return {v[0], v[1], v[2]};
  }
  calibration::ParamRange range() const {
    const auto v = numbers();
    if (v.size() < 1 || v.size() > 3) fail("expected 'value' or 'lo, hi[, resolution]'");
    calibration::ParamRange r;
    r.lo = v[0];
    r.hi = v.size() > 1 ? v[1] : v[0];
    r.resolution = 1;
    if (v.size() == 3) {
      if (v[2] < 1 || v[2] != std::floor(v[2])) fail("resolution must be a positive integer");
      r.resolution = static_cast<int>(v[2]);
    } else if (v.size() == 2) {
      r.resolution = 3;
    }
    if (r.hi < r.lo) fail("range is empty");
    return r;
  }
  bool boolean() const {
    if (value() == "true" || value() == "1" || value() == "on") return true;
    if (value() == "false" || value() == "0" || value() == "off") return false;
    fail("expected true or false");
  }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& part : io::split(value(), ','))
      if (!io::trim(part).empty()) out.push_back(io::trim(part));
    return out;
  }
};

using Handlers = std::map<std::string, std::function<void(const Field&)>>;

void apply(const std::string& source, const IniSection& s, const Handlers& handlers) {
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    Field f{source, s, i};
    auto it = handlers.find(f.key());
    if (it == handlers.end()) f.fail("unknown key");
    it->second(f);
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

std::vector<IniSection> parse_ini(std::istream& in, const std::string& source) {
  std::vector<IniSection> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = io::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) throw ParseError(source + ":" + std::to_string(n) + ": bad section header");
      out.push_back({io::trim(t.substr(1, t.size() - 2)), n, {}, {}});
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(source + ":" + std::to_string(n) + ": expected 'key = value'");
    if (out.empty()) throw ParseError(source + ":" + std::to_string(n) + ": key outside of a section");
    const std::string key = io::trim(t.substr(0, eq));
    if (key.empty()) throw ParseError(source + ":" + std::to_string(n) + ": empty key");
    out.back().entries.emplace_back(key, io::trim(t.substr(eq + 1)));
    out.back().entry_lines.push_back(n);
  }
  return out;
}

Scenario parse_scenario(std::istream& in, const std::string& source, const fs::path& base_dir) {
  Scenario sc;
  sc.source = source;
  auto& ex = sc.experiment;
  bool have_table = false;
  const auto sections = parse_ini(in, source);

  for (const auto& s : sections) {
    if (s.name == "scene") {
      apply(source, s,
            {{"param_table",
              [&](const Field& f) {
                sc.param_table = resolve(base_dir, f.value());
                have_table = true;
              }},
             {"pinned_faces", [&](const Field& f) { sc.pinned_faces = f.names(); }},
             {"seed",
              [&](const Field& f) {
                const auto v = f.integer();
                if (v < 0) f.fail("must be >= 0");
                sc.seed = static_cast<std::uint64_t>(v);
              }},
             {"noise", [&](const Field& f) { sc.noise = f.number(); }}});
    } else if (s.name == "mesh") {
      MeshEntry m;
      bool have_path = false;
      apply(source, s,
            {{"path",
              [&](const Field& f) {
                m.path = resolve(base_dir, f.value());
                have_path = true;
              }},
             {"units_scale",
              [&](const Field& f) {
                m.units_scale = f.number();
                if (!(m.units_scale > 0.0)) f.fail("must be > 0");
              }},
             {"structure", [&](const Field& f) { m.structure = f.value(); }}});
      if (!have_path) throw ConfigError(source + ":" + std::to_string(s.line) + ": [mesh] needs a path");
      if (m.structure.empty()) throw ConfigError(source + ":" + std::to_string(s.line) + ": [mesh] needs a structure");
      sc.meshes.push_back(m);
    } else if (s.name == "catheter") {
      apply(source, s,
            {{"radius", [&](const Field& f) { ex.rig.radius = f.number(); }},
             {"start_tip", [&](const Field& f) { ex.rig.start_tip = f.vec3(); }},
             {"direction",
              [&](const Field& f) {
                const Vec3 d = f.vec3();
                if (!(d.norm() > 0.0)) f.fail("must be non-zero");
                ex.rig.direction = d.normalized();
              }},
             {"speed", [&](const Field& f) { ex.rig.speed = f.number(); }},
             {"shaft_length", [&](const Field& f) { ex.rig.shaft_length = f.number(); }},
             {"margin",
              [&](const Field& f) {
                ex.contact_margin = f.number();
                if (ex.contact_margin < 0.0) f.fail("must be >= 0");
              }},
             {"friction",
              [&](const Field& f) {
                ex.contact_friction = f.number();
                if (!(ex.contact_friction >= 0.0 && ex.contact_friction <= 1.0)) f.fail("must be in [0,1]");
              }}});
    } else if (s.name == "protocol") {
      auto& p = ex.protocol;
      apply(source, s,
            {{"depth_max", [&](const Field& f) { p.depth_max = f.number(); }},
             {"sample_interval", [&](const Field& f) { p.sample_interval = f.number(); }},
             {"measurement_depth", [&](const Field& f) { p.measurement_depth = f.number(); }},
             {"slab_half_width", [&](const Field& f) { p.slab_half_width = f.number(); }},
             {"repeats", [&](const Field& f) { p.repeats = static_cast<int>(f.integer()); }},
             {"max_speed_factor", [&](const Field& f) { ex.max_speed_factor = f.number(); }}});
    } else if (s.name == "sim") {
      auto& c = ex.sim;
      apply(source, s,
            {{"dt", [&](const Field& f) { c.dt = f.number(); }},
             {"solver_iterations", [&](const Field& f) { c.solver_iterations = static_cast<int>(f.integer()); }},
             {"substeps", [&](const Field& f) { c.substeps = static_cast<int>(f.integer()); }},
             {"gravity", [&](const Field& f) { c.gravity = f.vec3(); }},
             {"damping", [&](const Field& f) { c.damping = f.number(); }},
             {"policy", [&](const Field& f) {
                if (f.value() == "serial")
                  c.policy = core::ExecPolicy::serial;
                else if (f.value() == "parallel")
                  c.policy = core::ExecPolicy::parallel;
                else
                  f.fail("expected serial or parallel");
              }}});
    } else if (s.name == "calibration") {
      auto& sp = sc.space;
      apply(source, s,
            {{"target", [&](const Field& f) { sc.calibration_target = f.value(); }},
             {"cluster_spacing", [&](const Field& f) { sp.cluster_spacing = f.range(); }},
             {"cluster_radius", [&](const Field& f) { sp.cluster_radius = f.range(); }},
             {"cluster_stiffness", [&](const Field& f) { sp.cluster_stiffness = f.range(); }},
             {"link_radius", [&](const Field& f) { sp.link_radius = f.range(); }},
             {"link_stiffness", [&](const Field& f) { sp.link_stiffness = f.range(); }},
             {"min_step_fraction", [&](const Field& f) {
                sc.min_step_fraction = f.number();
                if (!(sc.min_step_fraction > 0.0)) f.fail("must be > 0");
              }}});
    } else {
      throw ConfigError(source + ":" + std::to_string(s.line) + ": unknown section [" + s.name + "]");
    }
  }

  if (!have_table) throw ConfigError(source + ": [scene] param_table is required");
  if (sc.meshes.empty()) throw ConfigError(source + ": at least one [mesh] section is required");
  if (!fs::exists(sc.param_table)) throw ConfigError(source + ": param_table file not found: " + sc.param_table.string());
  for (const auto& m : sc.meshes)
    if (!fs::exists(m.path)) throw ConfigError(source + ": mesh file not found: " + m.path.string());
  if (sc.calibration_target.empty()) sc.calibration_target = sc.meshes.front().structure;
  try {
    ex.sim.validate();
    ex.rig.validate();
    ex.protocol.validate();
    sc.space.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (!(ex.max_speed_factor > 0.0)) throw ConfigError(source + ": [protocol] max_speed_factor must be > 0");
  return sc;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  return parse_scenario(in, path.string(), path.parent_path());
}

calibration::SceneSpec make_scene_spec(const Scenario& sc) {
  calibration::SceneSpec spec;
  spec.table = calibration::load_structure_params(sc.param_table);
  for (const auto& m : sc.meshes) {
    if (!spec.table.contains(m.structure))
      throw ConfigError(sc.source.string() + ": mesh " + m.path.string() + " names structure '" + m.structure +
                        "', which is not in " + sc.param_table.string());
    spec.meshes.push_back({m.structure, geometry::load_mesh(m.path, m.units_scale)});
  }
  spec.pinned_faces = sc.pinned_faces;
  spec.seed = sc.seed;
  spec.noise = sc.noise;
  spec.validate();
  return spec;
}

metrics::ProbeSpec parse_probe_spec(std::istream& in, const std::string& source) {
  metrics::ProbeSpec spec;
  const auto sections = parse_ini(in, source);
  bool found = false;
  for (const auto& s : sections) {
    if (s.name != "probes") throw ConfigError(source + ":" + std::to_string(s.line) + ": unknown section [" + s.name + "]");
    found = true;
    apply(source, s,
          {{"origin", [&](const Field& f) { spec.origin = f.vec3(); }},
           {"direction",
            [&](const Field& f) {
              const Vec3 d = f.vec3();
              if (!(d.norm() > 0.0)) f.fail("must be non-zero");
              spec.direction = d.normalized();
            }},
           {"hole_radius", [&](const Field& f) { spec.hole_radius = f.number(); }},
           {"depth_start", [&](const Field& f) { spec.depth_start = f.number(); }},
           {"depth_end", [&](const Field& f) { spec.depth_end = f.number(); }}});
  }
  if (!found) throw ConfigError(source + ": missing [probes] section");
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return spec;
}

metrics::ProbeSpec load_probe_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open probe spec " + path.string());
  return parse_probe_spec(in, path.string());
}

}  // namespace pbdsim::cli
