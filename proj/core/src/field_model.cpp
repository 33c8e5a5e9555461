#include "maglocate/field_model.hpp"

#include <cmath>
#include <sstream>

namespace maglocate {

namespace {

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    std::ostringstream os;
    os << "MagnetSpec." << name << " must be positive and finite, got " << value;
    throw InvalidArgument(os.str());
  }
}

}  // namespace

void MagnetSpec::validate() const {
  require_positive(length, "length");
  require_positive(radius, "radius");
  require_positive(magnetization, "magnetization");
  require_positive(mu_r, "mu_r");
}

bool MagnetPose::has_unit_orientation(double tol) const {
  return std::abs(orientation.norm() - 1.0) <= tol;
}

void MagnetPose::validate() const {
  if (!position.allFinite() || !orientation.allFinite()) {
    throw InvalidArgument("MagnetPose has non-finite components");
  }
  if (!has_unit_orientation()) {
    std::ostringstream os;
    os << "MagnetPose orientation must be unit length, |H0| = " << orientation.norm();
    throw InvalidArgument(os.str());
  }
}

MagnetPose make_pose(const Vec3& position, const Vec3& direction) {
  const double norm = direction.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvalidArgument("orientation direction must be non-zero and finite");
  }
  return MagnetPose{position, direction / norm};
}

double dipole_strength(const MagnetSpec& spec) {
  spec.validate();
  // mu_r * mu_0 * pi * r^2 * L * M0 / (4 pi); the pi cancels.
  return spec.mu_r * kMu0 * spec.radius * spec.radius * spec.length * spec.magnetization / 4.0;
}

DipoleField::DipoleField(double strength, double epsilon, int) : strength_(strength), epsilon_(epsilon) {
  if (!std::isfinite(strength_) || strength_ <= 0.0) {
    throw InvalidArgument("dipole strength must be positive");
  }
  if (!(epsilon_ >= 0.0)) {
    throw InvalidArgument("singularity epsilon must be non-negative");
  }
}

DipoleField::DipoleField(const MagnetSpec& spec, double singularity_epsilon)
    : DipoleField(dipole_strength(spec), singularity_epsilon, 0) {}

DipoleField DipoleField::from_strength(double strength, double singularity_epsilon) {
  return DipoleField(strength, singularity_epsilon, 0);
}

namespace {

struct Geometry {
  Vec3 p;
  double r2;
  double inv_r3;
  double inv_r5;
};

Geometry geometry(const MagnetPose& pose, const Vec3& sensor, double epsilon) {
  Geometry g;
  g.p = sensor - pose.position;
  g.r2 = g.p.squaredNorm();
  const double r = std::sqrt(g.r2);
  if (!(r >= epsilon) || r == 0.0) {
    std::ostringstream os;
    os << "sensor at distance " << r << " m from the magnet (epsilon " << epsilon << " m)";
    throw SingularityError(os.str());
  }
  g.inv_r3 = 1.0 / (g.r2 * r);
  g.inv_r5 = g.inv_r3 / g.r2;
  return g;
}

}  // namespace

FluxVector DipoleField::flux(const MagnetPose& pose, const Vec3& sensor) const {
  const Geometry g = geometry(pose, sensor, epsilon_);
  const Vec3& h = pose.orientation;
  return strength_ * (3.0 * h.dot(g.p) * g.inv_r5 * g.p - g.inv_r3 * h);
}

void DipoleField::evaluate(const MagnetPose& pose, const Vec3& sensor, FluxVector& flux,
                           FluxJacobian& jac) const {
  const Geometry g = geometry(pose, sensor, epsilon_);
  const Vec3& h = pose.orientation;
  const Vec3& p = g.p;
  const double hp = h.dot(p);
  const double inv_r7 = g.inv_r5 / g.r2;

  flux = strength_ * (3.0 * hp * g.inv_r5 * p - g.inv_r3 * h);

  // dB/dP = B_T [3 (P H^T + H P^T + (H.P) I) / R^5 - 15 (H.P) P P^T / R^7]
  Eigen::Matrix3d d_dp = 3.0 * g.inv_r5 * (p * h.transpose() + h * p.transpose());
  d_dp.diagonal().array() += 3.0 * g.inv_r5 * hp;
  d_dp.noalias() -= 15.0 * hp * inv_r7 * (p * p.transpose());

  // P = s - position, so d/dposition = -d/dP.
  jac.leftCols<3>() = -strength_ * d_dp;

  // dB/dH = B_T [3 P P^T / R^5 - I / R^3]
  Eigen::Matrix3d d_dh = 3.0 * g.inv_r5 * (p * p.transpose());
  d_dh.diagonal().array() -= g.inv_r3;
  jac.rightCols<3>() = strength_ * d_dh;
}

FluxJacobian DipoleField::jacobian(const MagnetPose& pose, const Vec3& sensor) const {
  FluxVector unused;
  FluxJacobian jac;
  evaluate(pose, sensor, unused, jac);
  return jac;
}

FluxVector flux_at(const MagnetPose& pose, const MagnetSpec& spec, const Vec3& sensor,
                   double singularity_epsilon) {
  return DipoleField(spec, singularity_epsilon).flux(pose, sensor);
}

FluxJacobian flux_jacobian(const MagnetPose& pose, const MagnetSpec& spec, const Vec3& sensor,
                           double singularity_epsilon) {
  return DipoleField(spec, singularity_epsilon).jacobian(pose, sensor);
}

}  // namespace maglocate
