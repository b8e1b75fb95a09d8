#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pbdsim/shape/clusters.hpp"

namespace pbdsim::calibration {

struct StructureParams {
  std::string name;
  double particle_spacing = 0.0025;
  shape::ClusterParams cluster;

  void validate() const;
};

/// Per-structure parameters, in file order.
struct StructureParamTable {
  std::vector<StructureParams> rows;

  bool contains(const std::string& name) const;
  /// Throws ConfigError naming the structure when absent.
  const StructureParams& find(const std::string& name) const;
};

/// Header `name,particle_spacing,cluster_spacing_radius,cluster_stiffness,link_radius,link_stiffness`;
/// `cluster_spacing,cluster_radius` may replace the combined column. Every
/// value is required and range-checked.
StructureParamTable parse_param_table(std::istream& in, const std::string& source);
StructureParamTable load_structure_params(const std::filesystem::path& path);

/// Writes the split-column form, which round-trips any radius.
void write_param_table(std::ostream& out, const StructureParamTable& table);

}  // namespace pbdsim::calibration
