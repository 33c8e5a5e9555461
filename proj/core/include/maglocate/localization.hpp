#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <vector>

#include "maglocate/field_model.hpp"
#include "maglocate/measurement.hpp"
#include "maglocate/sensor_array.hpp"

namespace maglocate {

enum class InitStrategy {
  kCentroid,  // weighted sensor centroid lifted by the on-axis height estimate, spread orientations
  kGrid,      // coarse 5x5x5 workspace grid crossed with the six axis directions
};

std::string to_string(InitStrategy strategy);
InitStrategy parse_init_strategy(const std::string& text);

enum class TerminationReason {
  kGradient,
  kStep,
  kCost,
  kMaxIterations,
  kNoSignal,  // every reading is zero; nothing to fit
};

std::string to_string(TerminationReason reason);

struct SolverConfig {
  int max_iterations = 200;
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.1;
  double gradient_tol = 1e-18;  // max |J^T r|, T^2 scale
  double step_tol = 1e-10;      // |delta| <= step_tol * (|x| + step_tol)
  double cost_tol = 1e-12;      // relative decrease of an accepted step
  int multistart_count = 8;
  InitStrategy strategy = InitStrategy::kCentroid;
  double workspace_margin = 0.25;  // m, lateral expansion of the array bounding box for kGrid
  double workspace_height = 0.25;  // m, grid heights span (plane, plane + height]

  void validate() const;
};

// Five-parameter chart for the six constrained unknowns:
//   orientation = frame * (sin(polar) cos(azimuth), sin(polar) sin(azimuth), cos(polar))
// so |orientation| = 1 holds by construction. `frame` is a rotation that is
// re-anchored when the chart approaches its pole.
struct PoseParams {
  using Vector = Eigen::Matrix<double, 5, 1>;

  Vec3 position = Vec3::Zero();
  double polar = 0.0;
  double azimuth = 0.0;
  Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();

  Vector vector() const;
  PoseParams with_vector(const Vector& x) const;
  Vec3 orientation() const;
  // d(orientation) / d(polar, azimuth)
  Eigen::Matrix<double, 3, 2> orientation_jacobian() const;
};

inline constexpr double kReanchorSinThreshold = 1e-3;

MagnetPose to_pose(const PoseParams& params);
// Identity chart when well-conditioned, otherwise re-anchored.
PoseParams to_params(const MagnetPose& pose);
// Moves the chart so the current orientation sits on its equator (polar = pi/2, azimuth = 0).
PoseParams reanchor(const PoseParams& params);
bool needs_reanchor(const PoseParams& params);

// Binds a frame of readings to the array and magnet model.
class LocalizationProblem {
 public:
  using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, 5>;

  LocalizationProblem(const ReadingSet& readings, const SensorArray& array, const MagnetSpec& spec);

  std::size_t sensor_count() const noexcept { return sensors_.size(); }
  const DipoleField& field() const noexcept { return field_; }

  // (E_x, E_y, E_z) with E_axis = sum_l (B'_l,axis - B_l,axis)^2.
  Vec3 objective_components(const PoseParams& params) const;
  // E_x + E_y + E_z.
  double objective(const PoseParams& params) const;
  double objective(const MagnetPose& pose) const;

  // r_k = model - measured, sensor-major then axis (length 3N).
  Eigen::VectorXd residuals(const PoseParams& params) const;
  void linearize(const PoseParams& params, Eigen::VectorXd& residuals, Jacobian& jacobian) const;

  double peak_magnitude() const;

 private:
  std::vector<Vec3> sensors_;
  std::vector<FluxVector> measured_;
  DipoleField field_;
};

struct Linearization {
  Eigen::VectorXd residuals;
  LocalizationProblem::Jacobian jacobian;
};

double objective(const PoseParams& params, const ReadingSet& readings, const SensorArray& array,
                 const MagnetSpec& spec);

Linearization residuals_and_jacobian(const PoseParams& params, const ReadingSet& readings,
                                     const SensorArray& array, const MagnetSpec& spec);

// Distance at which the on-axis dipole field 2 B_T / R^3 has magnitude `peak`.
double on_axis_distance(double strength, double peak);

// Multistart candidates. kCentroid returns exactly multistart_count starts;
// kGrid returns at most multistart_count, sorted by ascending objective.
// Throws InvalidArgument if every reading is saturated or carries no signal.
std::vector<PoseParams> initial_guess(const ReadingSet& readings, const SensorArray& array, const MagnetSpec& spec,
                                      const SolverConfig& config);

struct EstimateReport {
  MagnetPose pose;
  double final_cost = 0.0;  // T^2
  int iterations = 0;
  bool converged = false;
  TerminationReason termination = TerminationReason::kMaxIterations;
  double residual_rms = 0.0;  // T
  std::vector<double> cost_history;  // initial cost, then each accepted step
  int start_index = 0;
};

// Damped least squares with Marquardt scaling:
//   (J^T J + lambda diag(J^T J)) delta = -J^T r
// Accepted steps shrink lambda by damping_down, rejected ones grow it by damping_up.
EstimateReport lm_solve(const PoseParams& init, const ReadingSet& readings, const SensorArray& array,
                        const MagnetSpec& spec, const SolverConfig& config);

// Runs lm_solve from each start and keeps the lowest final cost; ties go to the earlier start.
EstimateReport localize_from(const std::vector<PoseParams>& starts, const ReadingSet& readings,
                             const SensorArray& array, const MagnetSpec& spec, const SolverConfig& config);

// initial_guess + localize_from. All-zero readings yield a non-converged
// kNoSignal report instead of an exception.
EstimateReport localize(const ReadingSet& readings, const SensorArray& array, const MagnetSpec& spec,
                        const SolverConfig& config);

}  // namespace maglocate
