#pragma once

#include <Eigen/Core>

#include "maglocate/common.hpp"

namespace maglocate {

inline constexpr double kMu0 = 4.0 * kPi * 1e-7;  // T*m/A
inline constexpr double kDefaultSingularityEpsilon = 1e-6;  // m

// Cylindrical permanent magnet. SI units.
struct MagnetSpec {
  double length = 2e-3;          // m
  double radius = 1e-3;          // m
  double magnetization = 8e5;    // A/m, sintered NdFeB order of magnitude
  double mu_r = 1.0;

  // Throws InvalidArgument if any field is non-positive or non-finite.
  void validate() const;
};

// Magnet position (a, b, c) and south-to-north orientation (m, n, p).
struct MagnetPose {
  Vec3 position = Vec3::Zero();
  Vec3 orientation = Vec3::UnitZ();

  bool has_unit_orientation(double tol = 1e-9) const;

  // Throws InvalidArgument unless position is finite and |orientation| = 1 within 1e-9.
  void validate() const;
};

// Builds a pose from an arbitrary non-zero direction, normalizing it.
MagnetPose make_pose(const Vec3& position, const Vec3& direction);

using FluxVector = Eigen::Vector3d;  // tesla
using FluxJacobian = Eigen::Matrix<double, 3, 6>;

// B_T = mu_r * mu_0 * r^2 * L * M0 / 4, in T*m^3.
double dipole_strength(const MagnetSpec& spec);

// Point-dipole forward model
//
//   B(s) = B_T * (3 (H0 . P) P / R^5 - H0 / R^3),   P = s - position, R = |P|
//
// and its derivatives with respect to (a, b, c, m, n, p). The orientation is
// used as given; callers normalize it. Sensors closer than the singularity
// epsilon raise SingularityError.
class DipoleField {
 public:
  explicit DipoleField(const MagnetSpec& spec, double singularity_epsilon = kDefaultSingularityEpsilon);

  // Bypasses MagnetSpec; strength must be positive.
  static DipoleField from_strength(double strength, double singularity_epsilon = kDefaultSingularityEpsilon);

  double strength() const noexcept { return strength_; }
  double singularity_epsilon() const noexcept { return epsilon_; }

  FluxVector flux(const MagnetPose& pose, const Vec3& sensor) const;

  // Columns 0..2: d/d(a,b,c) in T/m. Columns 3..5: d/d(m,n,p) in T.
  FluxJacobian jacobian(const MagnetPose& pose, const Vec3& sensor) const;

  // Flux and Jacobian sharing the geometric terms.
  void evaluate(const MagnetPose& pose, const Vec3& sensor, FluxVector& flux, FluxJacobian& jac) const;

 private:
  DipoleField(double strength, double epsilon, int);

  double strength_;
  double epsilon_;
};

FluxVector flux_at(const MagnetPose& pose, const MagnetSpec& spec, const Vec3& sensor,
                   double singularity_epsilon = kDefaultSingularityEpsilon);

FluxJacobian flux_jacobian(const MagnetPose& pose, const MagnetSpec& spec, const Vec3& sensor,
                           double singularity_epsilon = kDefaultSingularityEpsilon);

}  // namespace maglocate
