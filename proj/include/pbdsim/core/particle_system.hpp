#pragma once

#include <span>
#include <vector>

#include "pbdsim/common.hpp"

namespace pbdsim::core {

/// Structure-of-arrays particle state. inv_mass == 0 pins a particle.
struct ParticleSystem {
  std::vector<Vec3> positions;
  std::vector<Vec3> predicted;
  std::vector<Vec3> velocities;
  std::vector<double> inv_mass;

  std::size_t count() const { return positions.size(); }

  Index add(const Vec3& position, double inverse_mass = 1.0, const Vec3& velocity = Vec3::Zero());

  static ParticleSystem from_positions(std::span<const Vec3> positions, double inverse_mass = 1.0);

  /// Sizes agree, inverse masses are >= 0, state is finite.
  void validate() const;

  /// Sum of m v over free particles.
  Vec3 momentum() const;
};

}  // namespace pbdsim::core
