#include "pbdsim/shape/links.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <unordered_map>

namespace pbdsim::shape {

std::vector<DistanceLink> build_links(std::span<const Vec3> particles, double link_radius, double link_stiffness,
                                      Index index_offset) {
  if (!(link_radius > 0.0)) throw ConfigError("link_radius must be > 0");
  if (!(link_stiffness >= 0.0 && link_stiffness <= 1.0)) throw ConfigError("link_stiffness outside [0,1]");
  std::vector<DistanceLink> links;
  if (particles.size() < 2) return links;

  // Uniform hash grid with cell = radius; only neighbouring cells are tested.
  const double cell = link_radius;
  const double limit = link_radius * (1.0 + 1e-9);
  auto key_of = [&](const Vec3& p) {
    return std::array<long long, 3>{static_cast<long long>(std::floor(p.x() / cell)),
                                    static_cast<long long>(std::floor(p.y() / cell)),
                                    static_cast<long long>(std::floor(p.z() / cell))};
  };
  auto hash = [](const std::array<long long, 3>& k) {
    return static_cast<std::size_t>(k[0] * 73856093LL ^ k[1] * 19349663LL ^ k[2] * 83492791LL);
  };
  std::unordered_map<std::size_t, std::vector<Index>> grid;
  std::vector<std::array<long long, 3>> keys(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) {
    keys[i] = key_of(particles[i]);
    grid[hash(keys[i])].push_back(static_cast<Index>(i));
  }

  std::vector<Index> neighbours;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    neighbours.clear();
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        for (long long dz = -1; dz <= 1; ++dz) {
          const std::array<long long, 3> k{keys[i][0] + dx, keys[i][1] + dy, keys[i][2] + dz};
          auto it = grid.find(hash(k));
          if (it == grid.end()) continue;
          for (Index j : it->second)
            if (j > i && keys[j] == k) neighbours.push_back(j);
        }
    std::sort(neighbours.begin(), neighbours.end());
    for (Index j : neighbours) {
      const double d = (particles[j] - particles[i]).norm();
      if (d <= limit && d > 0.0)
        links.push_back({static_cast<Index>(i + index_offset), static_cast<Index>(j + index_offset), d, link_stiffness});
    }
  }
  return links;
}

}  // namespace pbdsim::shape
