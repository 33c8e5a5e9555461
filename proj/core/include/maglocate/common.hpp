#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace maglocate {

using Vec3 = Eigen::Vector3d;

// All library errors derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Sensor coincides with the magnet (R below the singularity epsilon).
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Scenario or CLI configuration error.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unit conversions used at the CLI / config boundary only.
inline constexpr double kMillimeter = 1e-3;
inline constexpr double kMicrotesla = 1e-6;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kRadToDeg = 180.0 / kPi;

}  // namespace maglocate
