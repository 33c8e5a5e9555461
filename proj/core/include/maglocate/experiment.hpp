#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "maglocate/field_model.hpp"
#include "maglocate/localization.hpp"
#include "maglocate/measurement.hpp"
#include "maglocate/metrics.hpp"
#include "maglocate/sensor_array.hpp"

namespace maglocate {

// Where a scenario's sensor array comes from.
struct ArraySource {
  enum class Kind { kFamily, kGrid, kFile };

  Kind kind = Kind::kFamily;
  LayoutFamily family = LayoutFamily::kFourByM;
  int size = 5;
  ReferenceLayoutOptions layout;  // kFamily
  GridLayoutSpec grid;            // kGrid
  std::string file;               // kFile

  SensorArray build() const;
  std::string describe() const;
};

struct LabeledPose {
  std::string label;
  MagnetPose pose;
};

// Uniform positions in an axis-aligned box; orientation fixed or uniform on the sphere.
struct PoseSampler {
  int count = 0;
  Vec3 lower = Vec3::Zero();  // m
  Vec3 upper = Vec3::Zero();  // m
  bool random_orientation = true;
  Vec3 orientation = Vec3::UnitZ();  // used when random_orientation is false
};

// Labels "P0", "P1", ...; deterministic in seed.
std::vector<LabeledPose> sample_poses(const PoseSampler& sampler, std::uint64_t seed);

// Frames simulated per trial: warmup + window * groups. The estimate uses the
// last frame, filtered or raw.
struct FilterConfig {
  bool enabled = false;
  std::size_t window = 4;
  std::size_t groups = 1;
  std::size_t warmup = 0;

  std::size_t frame_count() const { return warmup + window * groups; }
};

struct Scenario {
  std::string name = "scenario";
  ArraySource array;
  MagnetSpec magnet;
  std::vector<LabeledPose> poses;
  SensorModel sensor;
  FilterConfig filter;
  SolverConfig solver;
  int trials = 1;
  std::uint64_t seed = 1;

  // trials >= 1, at least one pose, unique labels, valid sub-configs.
  void validate() const;
};

struct ResultRow {
  std::string scenario;
  std::size_t pose_index = 0;
  std::string pose_label;
  int trial = 0;
  bool ok = false;          // false: the trial raised an error, see `failure`
  std::string failure;
  PoseError error;          // SI
  MagnetPose estimate;
  bool converged = false;
  int iterations = 0;
  double final_cost = 0.0;
  TerminationReason termination = TerminationReason::kMaxIterations;
};

// Summary in reporting units: Ep in mm, Eo dimensionless, theta in degrees.
// Only successful rows contribute; failures are counted.
struct AggregateRow {
  std::string scenario;
  std::string group;  // pose label, or "ALL"
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  ErrorSummary summary;
};

inline constexpr const char* kAllGroup = "ALL";

struct ResultTable {
  std::string scenario;
  std::vector<ResultRow> rows;            // pose-major, then trial
  std::vector<AggregateRow> aggregates;   // one per pose in pose order, then ALL

  const AggregateRow& overall() const;
  const AggregateRow& group(const std::string& label) const;
};

// Converts a row's SI errors to reporting units (mm, -, deg).
PoseError to_report_units(const PoseError& e);

// Aggregate blocks for the rows of one scenario, pose order preserved.
std::vector<AggregateRow> aggregate_rows(const std::string& scenario, const std::vector<ResultRow>& rows);

// For each (pose, trial): seed = trial_seed(seed, name, pose, trial), simulate
// the frame stream, trim warmup, optionally filter, localize on the last
// frame and score it. Per-trial errors become failed rows.
ResultTable run_scenario(const Scenario& s);

struct SizedResult {
  int size = 0;
  ResultTable table;
};

// Same poses, noise and solver across array sizes of one layout family.
std::vector<SizedResult> experiment_sensor_count(LayoutFamily family, const std::vector<int>& sizes,
                                                 const Scenario& base);

enum class GeometryAxis { kVerticalHeight, kHorizontalDistance };

std::string to_string(GeometryAxis axis);
GeometryAxis parse_geometry_axis(const std::string& text);

inline constexpr double kHorizontalSweepHeight = 30e-3;

// Poses for a geometry sweep: straight above the array centroid at each
// height, or beside the array at kHorizontalSweepHeight, the offset measured
// outward from the +x edge.
std::vector<LabeledPose> geometry_poses(GeometryAxis axis, const std::vector<double>& offsets,
                                        const SensorArray& array, const Vec3& orientation,
                                        double lateral_height = kHorizontalSweepHeight);

ResultTable experiment_geometry(GeometryAxis axis, const std::vector<double>& offsets, const Scenario& base,
                                const Vec3& orientation = Vec3::UnitZ());

// Five labeled positions at `height` above the array plane: No.3 at the
// centroid, No.1/No.5 `margin` beyond the -x/+x edges, No.2/No.4 beyond the
// -y/+y edges, each on the edge midline.
std::vector<LabeledPose> canonical_positions(const SensorArray& array, double height = 30e-3,
                                             double margin = 30e-3, const Vec3& orientation = Vec3::UnitZ());

// Runs `positions` (canonical_positions when empty). Throws on duplicate labels.
ResultTable experiment_positions(const std::vector<LabeledPose>& positions, const Scenario& base);

struct FilterComparison {
  ResultTable raw;
  ResultTable filtered;
  std::vector<Vec3> residual_per_pose;  // mean |raw - filtered| per axis, T
  Vec3 residual_overall = Vec3::Zero();
};

// Feeds one noise realization per trial to both branches. With window 1 the
// branches coincide.
FilterComparison experiment_filter_comparison(const Scenario& base);

}  // namespace maglocate
