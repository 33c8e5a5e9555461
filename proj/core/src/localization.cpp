#include "maglocate/localization.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace maglocate {

std::string to_string(InitStrategy strategy) {
  switch (strategy) {
    case InitStrategy::kCentroid:
      return "centroid";
    case InitStrategy::kGrid:
      return "grid";
  }
  return "unknown";
}

InitStrategy parse_init_strategy(const std::string& text) {
  if (text == "centroid") return InitStrategy::kCentroid;
  if (text == "grid") return InitStrategy::kGrid;
  throw InvalidArgument("unknown init strategy '" + text + "' (expected centroid or grid)");
}

std::string to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kGradient:
      return "gradient";
    case TerminationReason::kStep:
      return "step";
    case TerminationReason::kCost:
      return "cost";
    case TerminationReason::kMaxIterations:
      return "max_iter";
    case TerminationReason::kNoSignal:
      return "no_signal";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  if (!(initial_damping > 0.0)) throw InvalidArgument("initial_damping must be positive");
  if (!(damping_up > 1.0)) throw InvalidArgument("damping_up must exceed 1");
  if (!(damping_down > 0.0 && damping_down < 1.0)) throw InvalidArgument("damping_down must lie in (0, 1)");
  if (!(gradient_tol > 0.0) || !(step_tol > 0.0) || !(cost_tol > 0.0)) {
    throw InvalidArgument("solver tolerances must be positive");
  }
  if (multistart_count < 1) throw InvalidArgument("multistart_count must be >= 1");
  if (!(workspace_margin >= 0.0) || !(workspace_height > 0.0)) {
    throw InvalidArgument("workspace bounds must be non-negative (height positive)");
  }
}

// ---------------------------------------------------------------------------
// Orientation chart

PoseParams::Vector PoseParams::vector() const {
  Vector x;
  x << position, polar, azimuth;
  return x;
}

PoseParams PoseParams::with_vector(const Vector& x) const {
  PoseParams out = *this;
  out.position = x.head<3>();
  out.polar = x[3];
  out.azimuth = x[4];
  return out;
}

Vec3 PoseParams::orientation() const {
  const double st = std::sin(polar);
  return frame * Vec3(st * std::cos(azimuth), st * std::sin(azimuth), std::cos(polar));
}

Eigen::Matrix<double, 3, 2> PoseParams::orientation_jacobian() const {
  const double st = std::sin(polar), ct = std::cos(polar);
  const double sa = std::sin(azimuth), ca = std::cos(azimuth);
  Eigen::Matrix<double, 3, 2> local;
  local << ct * ca, -st * sa,
           ct * sa, st * ca,
           -st, 0.0;
  return frame * local;
}

MagnetPose to_pose(const PoseParams& params) {
  MagnetPose pose;
  pose.position = params.position;
  const Vec3 h = params.orientation();
  pose.orientation = h / h.norm();
  return pose;
}

bool needs_reanchor(const PoseParams& params) {
  return std::abs(std::sin(params.polar)) < kReanchorSinThreshold;
}

namespace {

// Rotation whose first column is u.
Eigen::Matrix3d frame_with_first_axis(const Vec3& u) {
  const Vec3 a = u.normalized();
  // Pick the world axis least aligned with a to build the complement.
  Eigen::Index k = 0;
  a.cwiseAbs().minCoeff(&k);
  Vec3 helper = Vec3::Zero();
  helper[k] = 1.0;
  const Vec3 b = (helper - helper.dot(a) * a).normalized();
  Eigen::Matrix3d r;
  r.col(0) = a;
  r.col(1) = b;
  r.col(2) = a.cross(b);
  return r;
}

}  // namespace

PoseParams reanchor(const PoseParams& params) {
  PoseParams out;
  out.position = params.position;
  out.frame = frame_with_first_axis(params.orientation());
  out.polar = kPi / 2.0;
  out.azimuth = 0.0;
  return out;
}

PoseParams to_params(const MagnetPose& pose) {
  const Vec3 h = pose.orientation.normalized();
  PoseParams params;
  params.position = pose.position;
  params.polar = std::acos(std::clamp(h.z(), -1.0, 1.0));
  params.azimuth = std::atan2(h.y(), h.x());
  if (needs_reanchor(params)) {
    PoseParams anchored = params;
    anchored.frame = frame_with_first_axis(h);
    anchored.polar = kPi / 2.0;
    anchored.azimuth = 0.0;
    return anchored;
  }
  return params;
}

// ---------------------------------------------------------------------------
// Objective

LocalizationProblem::LocalizationProblem(const ReadingSet& readings, const SensorArray& array,
                                         const MagnetSpec& spec)
    : sensors_(array.positions()), measured_(readings.readings), field_(spec) {
  if (readings.size() != array.size()) {
    std::ostringstream os;
    os << "reading count " << readings.size() << " does not match sensor count " << array.size();
    throw InvalidArgument(os.str());
  }
}

Vec3 LocalizationProblem::objective_components(const PoseParams& params) const {
  const MagnetPose pose = to_pose(params);
  Vec3 e = Vec3::Zero();
  for (std::size_t l = 0; l < sensors_.size(); ++l) {
    e += (measured_[l] - field_.flux(pose, sensors_[l])).cwiseAbs2();
  }
  return e;
}

double LocalizationProblem::objective(const PoseParams& params) const {
  const Vec3 e = objective_components(params);
  return e.x() + e.y() + e.z();
}

double LocalizationProblem::objective(const MagnetPose& pose) const {
  Vec3 e = Vec3::Zero();
  for (std::size_t l = 0; l < sensors_.size(); ++l) {
    e += (measured_[l] - field_.flux(pose, sensors_[l])).cwiseAbs2();
  }
  return e.x() + e.y() + e.z();
}

Eigen::VectorXd LocalizationProblem::residuals(const PoseParams& params) const {
  const MagnetPose pose = to_pose(params);
  Eigen::VectorXd r(3 * sensors_.size());
  for (std::size_t l = 0; l < sensors_.size(); ++l) {
    r.segment<3>(3 * static_cast<Eigen::Index>(l)) = field_.flux(pose, sensors_[l]) - measured_[l];
  }
  return r;
}

void LocalizationProblem::linearize(const PoseParams& params, Eigen::VectorXd& residuals, Jacobian& jacobian) const {
  const auto n = static_cast<Eigen::Index>(sensors_.size());
  residuals.resize(3 * n);
  jacobian.resize(3 * n, 5);

  const MagnetPose pose = to_pose(params);
  const Eigen::Matrix<double, 3, 2> dh = params.orientation_jacobian();
  FluxVector b;
  FluxJacobian j6;
  for (Eigen::Index l = 0; l < n; ++l) {
    field_.evaluate(pose, sensors_[static_cast<std::size_t>(l)], b, j6);
    residuals.segment<3>(3 * l) = b - measured_[static_cast<std::size_t>(l)];
    jacobian.block<3, 3>(3 * l, 0) = j6.leftCols<3>();
    jacobian.block<3, 2>(3 * l, 3) = j6.rightCols<3>() * dh;
  }
}

double LocalizationProblem::peak_magnitude() const {
  double peak = 0.0;
  for (const auto& b : measured_) peak = std::max(peak, b.norm());
  return peak;
}

double objective(const PoseParams& params, const ReadingSet& readings, const SensorArray& array,
                 const MagnetSpec& spec) {
  return LocalizationProblem(readings, array, spec).objective(params);
}

Linearization residuals_and_jacobian(const PoseParams& params, const ReadingSet& readings, const SensorArray& array,
                                     const MagnetSpec& spec) {
  Linearization lin;
  LocalizationProblem(readings, array, spec).linearize(params, lin.residuals, lin.jacobian);
  return lin;
}

// ---------------------------------------------------------------------------
// Initialization

double on_axis_distance(double strength, double peak) {
  if (!(peak > 0.0)) throw InvalidArgument("on_axis_distance needs a positive field magnitude");
  return std::cbrt(2.0 * strength / peak);
}

namespace {

double safe_objective(const LocalizationProblem& problem, const MagnetPose& pose) {
  try {
    return problem.objective(pose);
  } catch (const SingularityError&) {
    return std::numeric_limits<double>::infinity();
  }
}

// Fibonacci lattice on the upper hemisphere (z > 0).
std::vector<Vec3> hemisphere_directions(int count) {
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - (k + 0.5) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * k;
    dirs.emplace_back(rho * std::cos(phi), rho * std::sin(phi), z);
  }
  return dirs;
}

std::vector<PoseParams> centroid_guess(const ReadingSet& readings, const SensorArray& array,
                                       const LocalizationProblem& problem, const SolverConfig& config) {
  Vec3 weighted = Vec3::Zero();
  double weight_sum = 0.0;
  double peak = 0.0;
  for (std::size_t l = 0; l < readings.size(); ++l) {
    if (readings.saturated[l]) continue;
    const double w = readings.readings[l].norm();
    weighted += w * array[l];
    weight_sum += w;
    peak = std::max(peak, w);
  }
  if (!(weight_sum > 0.0)) {
    throw InvalidArgument("initial_guess: no magnetic signal in the unsaturated readings");
  }
  const Vec3 centroid = weighted / weight_sum;
  // The array lies in a horizontal plane with the magnet above it.
  const Vec3 position = centroid + on_axis_distance(problem.field().strength(), peak) * Vec3::UnitZ();

  std::vector<PoseParams> starts;
  for (const Vec3& dir : hemisphere_directions(config.multistart_count)) {
    // The field is odd in the orientation; keep whichever sign fits better.
    const MagnetPose plus{position, dir};
    const MagnetPose minus{position, -dir};
    const bool flip = safe_objective(problem, minus) < safe_objective(problem, plus);
    starts.push_back(to_params(flip ? minus : plus));
  }
  return starts;
}

std::vector<PoseParams> grid_guess(const SensorArray& array, const LocalizationProblem& problem,
                                   const SolverConfig& config) {
  constexpr int kSteps = 5;
  const Vec3 lo = array.min_corner();
  const Vec3 hi = array.max_corner();
  const double x0 = lo.x() - config.workspace_margin, x1 = hi.x() + config.workspace_margin;
  const double y0 = lo.y() - config.workspace_margin, y1 = hi.y() + config.workspace_margin;
  const double plane = hi.z();

  const Vec3 axes[6] = {Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};

  struct Candidate {
    MagnetPose pose;
    double cost;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(kSteps * kSteps * kSteps * 6);
  for (int iz = 0; iz < kSteps; ++iz) {
    const double z = plane + config.workspace_height * (iz + 1) / kSteps;
    for (int ix = 0; ix < kSteps; ++ix) {
      const double x = x0 + (x1 - x0) * ix / (kSteps - 1);
      for (int iy = 0; iy < kSteps; ++iy) {
        const double y = y0 + (y1 - y0) * iy / (kSteps - 1);
        for (const Vec3& axis : axes) {
          const MagnetPose pose{Vec3(x, y, z), axis};
          const double cost = safe_objective(problem, pose);
          if (std::isfinite(cost)) candidates.push_back({pose, cost});
        }
      }
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });
  const std::size_t keep = std::min(candidates.size(), static_cast<std::size_t>(config.multistart_count));
  std::vector<PoseParams> starts;
  starts.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) starts.push_back(to_params(candidates[i].pose));
  return starts;
}

}  // namespace

std::vector<PoseParams> initial_guess(const ReadingSet& readings, const SensorArray& array, const MagnetSpec& spec,
                                      const SolverConfig& config) {
  config.validate();
  const LocalizationProblem problem(readings, array, spec);
  const bool any_unsaturated = std::find(readings.saturated.begin(), readings.saturated.end(), false) !=
                               readings.saturated.end();
  if (!any_unsaturated) {
    throw InvalidArgument("initial_guess: every reading is saturated");
  }
  switch (config.strategy) {
    case InitStrategy::kCentroid:
      return centroid_guess(readings, array, problem, config);
    case InitStrategy::kGrid:
      return grid_guess(array, problem, config);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt

namespace {

constexpr double kMinDamping = 1e-16;
constexpr double kMaxDamping = 1e16;

bool small_step(const PoseParams::Vector& delta, const PoseParams::Vector& x, double tol) {
  return delta.norm() <= tol * (x.norm() + tol);
}

EstimateReport finish(const PoseParams& params, double cost, int iterations, TerminationReason reason,
                      std::vector<double> history, std::size_t residual_count) {
  EstimateReport report;
  report.pose = to_pose(params);
  report.final_cost = cost;
  report.iterations = iterations;
  report.termination = reason;
  report.converged = reason != TerminationReason::kMaxIterations && reason != TerminationReason::kNoSignal;
  report.residual_rms = std::sqrt(cost / static_cast<double>(residual_count));
  report.cost_history = std::move(history);
  return report;
}

}  // namespace

EstimateReport lm_solve(const PoseParams& init, const ReadingSet& readings, const SensorArray& array,
                        const MagnetSpec& spec, const SolverConfig& config) {
  config.validate();
  const LocalizationProblem problem(readings, array, spec);
  const std::size_t m = 3 * problem.sensor_count();

  PoseParams params = needs_reanchor(init) ? reanchor(init) : init;
  Eigen::VectorXd r;
  LocalizationProblem::Jacobian jac;
  problem.linearize(params, r, jac);
  double cost = r.squaredNorm();
  std::vector<double> history{cost};
  double lambda = config.initial_damping;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const PoseParams::Vector g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() <= config.gradient_tol) {
      return finish(params, cost, iter - 1, TerminationReason::kGradient, std::move(history), m);
    }

    Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
    PoseParams::Vector scale = jtj.diagonal();
    const double floor = std::max(scale.maxCoeff(), std::numeric_limits<double>::min()) * 1e-12;
    scale = scale.cwiseMax(floor);

    Eigen::Matrix<double, 5, 5> lhs = jtj;
    lhs.diagonal() += lambda * scale;
    const Eigen::LDLT<Eigen::Matrix<double, 5, 5>> ldlt(lhs);
    PoseParams::Vector delta;
    bool solved = ldlt.info() == Eigen::Success;
    if (solved) {
      delta = ldlt.solve(-g);
      solved = delta.allFinite();
    }
    if (!solved) {
      lambda = std::min(lambda * config.damping_up, kMaxDamping);
      continue;
    }

    const PoseParams::Vector x = params.vector();
    const PoseParams candidate = params.with_vector(x + delta);
    double trial_cost = std::numeric_limits<double>::infinity();
    try {
      trial_cost = problem.residuals(candidate).squaredNorm();
    } catch (const SingularityError&) {
      // Stepping onto a sensor counts as a failed step.
    }

    if (std::isfinite(trial_cost) && trial_cost < cost) {
      const double previous = cost;
      params = needs_reanchor(candidate) ? reanchor(candidate) : candidate;
      problem.linearize(params, r, jac);
      cost = trial_cost;
      history.push_back(cost);
      lambda = std::max(lambda * config.damping_down, kMinDamping);
      if (small_step(delta, x, config.step_tol)) {
        return finish(params, cost, iter, TerminationReason::kStep, std::move(history), m);
      }
      if (previous - cost <= config.cost_tol * previous) {
        return finish(params, cost, iter, TerminationReason::kCost, std::move(history), m);
      }
    } else {
      lambda = std::min(lambda * config.damping_up, kMaxDamping);
      if (small_step(delta, x, config.step_tol)) {
        return finish(params, cost, iter, TerminationReason::kStep, std::move(history), m);
      }
    }
  }
  return finish(params, cost, config.max_iterations, TerminationReason::kMaxIterations, std::move(history), m);
}

EstimateReport localize_from(const std::vector<PoseParams>& starts, const ReadingSet& readings,
                             const SensorArray& array, const MagnetSpec& spec, const SolverConfig& config) {
  if (starts.empty()) throw InvalidArgument("localize_from needs at least one start");
  EstimateReport best;
  bool have_best = false;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    EstimateReport report;
    try {
      report = lm_solve(starts[i], readings, array, spec, config);
    } catch (const SingularityError&) {
      continue;  // start placed on a sensor
    }
    report.start_index = static_cast<int>(i);
    if (!std::isfinite(report.final_cost)) continue;
    if (!have_best || report.final_cost < best.final_cost) {
      best = std::move(report);
      have_best = true;
    }
  }
  if (!have_best) throw SingularityError("every start coincides with a sensor");
  return best;
}

EstimateReport localize(const ReadingSet& readings, const SensorArray& array, const MagnetSpec& spec,
                        const SolverConfig& config) {
  config.validate();
  const LocalizationProblem problem(readings, array, spec);
  if (!(problem.peak_magnitude() > 0.0)) {
    PoseParams rest;
    rest.position = array.centroid() + config.workspace_height * Vec3::UnitZ();
    EstimateReport report;
    report.pose = to_pose(rest);
    report.final_cost = problem.objective(rest);
    report.residual_rms = std::sqrt(report.final_cost / static_cast<double>(3 * array.size()));
    report.termination = TerminationReason::kNoSignal;
    report.converged = false;
    report.cost_history = {report.final_cost};
    return report;
  }
  return localize_from(initial_guess(readings, array, spec, config), readings, array, spec, config);
}

}  // namespace maglocate
