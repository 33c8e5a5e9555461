#pragma once

// Reference computations used as independent oracles. None of these call the
// library's field or solver code.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Geometry>

#include "maglocate/field_model.hpp"
#include "maglocate/random.hpp"

namespace maglocate::test {

inline constexpr double kPi = 3.14159265358979323846;

// Dipole field written component by component.
inline Vec3 expanded_flux(double bt, const Vec3& pos, const Vec3& h, const Vec3& s) {
  const double dx = s.x() - pos.x();
  const double dy = s.y() - pos.y();
  const double dz = s.z() - pos.z();
  const double r2 = dx * dx + dy * dy + dz * dz;
  const double r = std::sqrt(r2);
  const double r3 = r2 * r;
  const double r5 = r3 * r2;
  const double dot = h.x() * dx + h.y() * dy + h.z() * dz;
  const double bx = bt * (3.0 * dot * dx / r5 - h.x() / r3);
  const double by = bt * (3.0 * dot * dy / r5 - h.y() / r3);
  const double bz = bt * (3.0 * dot * dz / r5 - h.z() / r3);
  return {bx, by, bz};
}

// Field of a uniformly magnetized cylinder, summed over nr x nphi x nz
// midpoint volume elements each treated as a point dipole of moment M0 dV.
inline Vec3 cylinder_flux(const MagnetSpec& spec, const Vec3& center, const Vec3& axis, const Vec3& sensor,
                          int nr, int nphi, int nz) {
  Vec3 u = axis.normalized();
  Vec3 e1 = std::abs(u.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  e1 = (e1 - e1.dot(u) * u).normalized();
  const Vec3 e2 = u.cross(e1);
  const double dr = spec.radius / nr;
  const double dphi = 2.0 * kPi / nphi;
  const double dzl = spec.length / nz;
  const double k = spec.mu_r * 4e-7 * kPi / (4.0 * kPi);
  Vec3 total = Vec3::Zero();
  for (int i = 0; i < nr; ++i) {
    const double rho = (i + 0.5) * dr;
    const double dv = rho * dr * dphi * dzl;
    const Vec3 m = spec.magnetization * dv * u;
    for (int j = 0; j < nphi; ++j) {
      const double phi = (j + 0.5) * dphi;
      for (int l = 0; l < nz; ++l) {
        const double z = -0.5 * spec.length + (l + 0.5) * dzl;
        const Vec3 at = center + rho * std::cos(phi) * e1 + rho * std::sin(phi) * e2 + z * u;
        const Vec3 d = sensor - at;
        const double r = d.norm();
        total += k * (3.0 * m.dot(d) * d / std::pow(r, 5) - m / std::pow(r, 3));
      }
    }
  }
  return total;
}

inline Vec3 random_unit(Rng& rng) {
  for (;;) {
    const Vec3 v(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double n = v.norm();
    if (n > 0.1 && n <= 1.0) return v / n;
  }
}

inline Vec3 random_vec(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

inline double max_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j);
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace maglocate::test
