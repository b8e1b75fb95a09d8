#pragma once

#include <span>
#include <vector>

#include "pbdsim/common.hpp"

namespace pbdsim::shape {

/// Distance constraint |p_i - p_j| = rest_length.
struct DistanceLink {
  Index i = 0;
  Index j = 0;
  double rest_length = 0.0;
  double stiffness = 1.0;
};

/// One link per unordered pair with separation <= link_radius (i < j, sorted
/// by (i, j)). Indices are offset by `index_offset`.
std::vector<DistanceLink> build_links(std::span<const Vec3> particles, double link_radius, double link_stiffness,
                                      Index index_offset = 0);

}  // namespace pbdsim::shape
