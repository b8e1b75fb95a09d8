#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pbdsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Index = std::uint32_t;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input, bad configuration or an unsatisfiable request. The CLI maps
/// these to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content; the message carries `source:line` context.
class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// The simulation produced non-finite state or tripped a stability sentinel.
/// The CLI maps these to exit code 2.
class InstabilityError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  InstabilityError(const std::string& what, std::size_t particle = npos,
                   std::string stage = {}, std::size_t constraint = npos)
      : Error(what), particle_(particle), stage_(std::move(stage)), constraint_(constraint) {}

  std::size_t particle() const { return particle_; }
  const std::string& stage() const { return stage_; }
  std::size_t constraint() const { return constraint_; }

 private:
  std::size_t particle_;
  std::string stage_;
  std::size_t constraint_;
};

inline bool all_finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

}  // namespace pbdsim
