#include "maglocate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace maglocate {

double position_error(const MagnetPose& calc, const MagnetPose& truth) {
  return (calc.position - truth.position).norm();
}

double orientation_error(const MagnetPose& calc, const MagnetPose& truth) {
  constexpr double kUnitTol = 1e-6;
  if (std::abs(calc.orientation.norm() - 1.0) > kUnitTol || std::abs(truth.orientation.norm() - 1.0) > kUnitTol) {
    throw InvalidArgument("orientation_error expects unit orientations");
  }
  return (calc.orientation - truth.orientation).norm();
}

double orientation_angle(const MagnetPose& calc, const MagnetPose& truth) {
  const double nc = calc.orientation.norm();
  const double nt = truth.orientation.norm();
  if (!(nc > 0.0) || !(nt > 0.0)) {
    throw InvalidArgument("orientation_angle: zero orientation vector");
  }
  const double c = std::abs(calc.orientation.dot(truth.orientation)) / (nc * nt);
  return std::acos(std::min(c, 1.0));
}

PoseError pose_error(const MagnetPose& calc, const MagnetPose& truth) {
  return PoseError{position_error(calc, truth), orientation_error(calc, truth), orientation_angle(calc, truth)};
}

namespace {

template <typename Field>
Stats stats_of(const std::vector<PoseError>& errors, Field field) {
  std::vector<double> values;
  values.reserve(errors.size());
  for (const auto& e : errors) values.push_back(e.*field);
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return Stats{sum / static_cast<double>(values.size()), values.back(), values.front()};
}

}  // namespace

ErrorSummary aggregate(const std::vector<PoseError>& errors) {
  if (errors.empty()) throw InvalidArgument("aggregate: empty error list");
  ErrorSummary out;
  out.position = stats_of(errors, &PoseError::position);
  out.orientation = stats_of(errors, &PoseError::orientation);
  out.angle = stats_of(errors, &PoseError::angle);
  out.count = errors.size();
  return out;
}

}  // namespace maglocate
