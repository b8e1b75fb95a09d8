#include "pbdsim/core/particle_system.hpp"

namespace pbdsim::core {

Index ParticleSystem::add(const Vec3& position, double inverse_mass, const Vec3& velocity) {
  positions.push_back(position);
  predicted.push_back(position);
  velocities.push_back(velocity);
  inv_mass.push_back(inverse_mass);
  return static_cast<Index>(positions.size() - 1);
}

ParticleSystem ParticleSystem::from_positions(std::span<const Vec3> pts, double inverse_mass) {
  ParticleSystem s;
  s.positions.assign(pts.begin(), pts.end());
  s.predicted = s.positions;
  s.velocities.assign(pts.size(), Vec3::Zero());
  s.inv_mass.assign(pts.size(), inverse_mass);
  return s;
}

void ParticleSystem::validate() const {
  const std::size_t n = positions.size();
  if (predicted.size() != n || velocities.size() != n || inv_mass.size() != n)
    throw ConfigError("particle system arrays have inconsistent lengths");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(inv_mass[i] >= 0.0) || !std::isfinite(inv_mass[i]))
      throw ConfigError("particle " + std::to_string(i) + " has invalid inverse mass");
    if (!all_finite(positions[i]) || !all_finite(velocities[i]))
      throw ConfigError("particle " + std::to_string(i) + " has non-finite state");
  }
}

Vec3 ParticleSystem::momentum() const {
  Vec3 p = Vec3::Zero();
  for (std::size_t i = 0; i < positions.size(); ++i)
    if (inv_mass[i] > 0.0) p += velocities[i] / inv_mass[i];
  return p;
}

}  // namespace pbdsim::core
