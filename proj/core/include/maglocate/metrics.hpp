#pragma once

#include <vector>

#include "maglocate/field_model.hpp"

namespace maglocate {

// Estimated-vs-true comparison. SI units: meters and radians.
struct PoseError {
  double position = 0.0;     // Ep, Euclidean distance of positions
  double orientation = 0.0;  // Eo, Euclidean distance of unit orientations, in [0, 2]
  double angle = 0.0;        // theta = acos|cos|, in [0, pi/2]
};

double position_error(const MagnetPose& calc, const MagnetPose& truth);

// Throws InvalidArgument if either orientation is not unit length within 1e-6.
double orientation_error(const MagnetPose& calc, const MagnetPose& truth);

// Folded angle between orientations; antipodal vectors give 0.
// Throws InvalidArgument on a zero orientation.
double orientation_angle(const MagnetPose& calc, const MagnetPose& truth);

PoseError pose_error(const MagnetPose& calc, const MagnetPose& truth);

struct Stats {
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;
};

struct ErrorSummary {
  Stats position;
  Stats orientation;
  Stats angle;
  std::size_t count = 0;
};

// Mean, max and min per metric. The mean sums the values in ascending order,
// so the result does not depend on the order of `errors`.
// Throws InvalidArgument on an empty list.
ErrorSummary aggregate(const std::vector<PoseError>& errors);

}  // namespace maglocate
