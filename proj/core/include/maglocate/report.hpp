#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "maglocate/experiment.hpp"
#include "maglocate/scenario_config.hpp"

namespace maglocate {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentOutput {
  std::vector<ResultTable> tables;
  std::optional<FilterComparison> filter;  // set for filter comparisons
};

ExperimentOutput run_experiment(const ExperimentConfig& config);

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

// results.csv: one row per (scenario, pose, trial); Ep in mm, theta in degrees.
void write_results_csv(std::ostream& out, const std::vector<ResultTable>& tables);
// aggregates.csv: mean/max/min per pose and ALL, same units.
void write_aggregates_csv(std::ostream& out, const std::vector<ResultTable>& tables);
// noise_residuals.csv: per-pose mean |raw - filtered| per axis in uT.
void write_noise_residuals_csv(std::ostream& out, const Scenario& scenario, const FilterComparison& comparison);

std::string meta_json(const ExperimentConfig& config, const ExperimentOutput& output);

// Writes results.csv, aggregates.csv, meta.json (and noise_residuals.csv for
// filter comparisons) into dir, creating it.
void write_run_directory(const ExperimentConfig& config, const ExperimentOutput& output,
                         const std::filesystem::path& dir);

}  // namespace maglocate
