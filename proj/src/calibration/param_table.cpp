#include "pbdsim/calibration/param_table.hpp"

#include <fstream>
#include <ostream>

#include "pbdsim/io/csv.hpp"

namespace pbdsim::calibration {

void StructureParams::validate() const {
  if (name.empty()) throw ConfigError("structure name is empty");
  if (!(particle_spacing > 0.0) || !std::isfinite(particle_spacing))
    throw ConfigError("structure '" + name + "': particle_spacing must be > 0");
  try {
    cluster.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("structure '" + name + "': " + e.what());
  }
}

bool StructureParamTable::contains(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return true;
  return false;
}

const StructureParams& StructureParamTable::find(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return r;
  throw ConfigError("structure '" + name + "' has no entry in the parameter table");
}

StructureParamTable parse_param_table(std::istream& in, const std::string& source) {
  const auto t = io::read_csv(in, source);
  const bool combined = t.has_column("cluster_spacing_radius");
  if (!combined && !(t.has_column("cluster_spacing") && t.has_column("cluster_radius")))
    throw ParseError(source + ": needs column 'cluster_spacing_radius' or 'cluster_spacing' and 'cluster_radius'");
  const std::size_t name = t.column("name"), ps = t.column("particle_spacing"),
                    cs = t.column(combined ? "cluster_spacing_radius" : "cluster_spacing"),
                    cr = t.column(combined ? "cluster_spacing_radius" : "cluster_radius"),
                    ck = t.column("cluster_stiffness"), lr = t.column("link_radius"), lk = t.column("link_stiffness");
  if (t.rows.empty()) throw ParseError(source + ": parameter table has no rows");

  StructureParamTable table;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    StructureParams p;
    p.name = t.text(r, name);
    p.particle_spacing = t.number(r, ps);
    p.cluster.cluster_spacing = t.number(r, cs);
    p.cluster.cluster_radius = t.number(r, cr);
    p.cluster.cluster_stiffness = t.number(r, ck);
    p.cluster.link_radius = t.number(r, lr);
    p.cluster.link_stiffness = t.number(r, lk);
    try {
      p.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(t.line_numbers[r]) + ": " + e.what());
    }
    if (table.contains(p.name))
      throw ConfigError(source + ":" + std::to_string(t.line_numbers[r]) + ": duplicate structure '" + p.name + "'");
    table.rows.push_back(std::move(p));
  }
  return table;
}

StructureParamTable load_structure_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open parameter table " + path.string());
  return parse_param_table(in, path.string());
}

void write_param_table(std::ostream& out, const StructureParamTable& table) {
  using io::format_double;
  out << "name,particle_spacing,cluster_spacing,cluster_radius,cluster_stiffness,link_radius,link_stiffness\n";
  for (const auto& r : table.rows)
    out << r.name << ',' << format_double(r.particle_spacing) << ',' << format_double(r.cluster.cluster_spacing)
        << ',' << format_double(r.cluster.cluster_radius) << ',' << format_double(r.cluster.cluster_stiffness) << ','
        << format_double(r.cluster.link_radius) << ',' << format_double(r.cluster.link_stiffness) << '\n';
}

}  // namespace pbdsim::calibration
