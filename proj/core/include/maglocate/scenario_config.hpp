#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maglocate/experiment.hpp"

namespace maglocate {

enum class ExperimentKind { kScenario, kSensorCount, kGeometry, kPositions, kFilterComparison };

std::string to_string(ExperimentKind kind);

// A parsed scenario config file. Lengths in the file are millimeters, fields
// microtesla; everything here is SI.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kScenario;
  Scenario scenario;

  // sensor_count
  LayoutFamily count_family = LayoutFamily::kFourByM;
  std::vector<int> sizes;

  // geometry
  GeometryAxis axis = GeometryAxis::kVerticalHeight;
  std::vector<double> offsets;
  Vec3 sweep_orientation = Vec3::UnitZ();

  // positions (canonical layout when scenario.poses is empty)
  double positions_height = 30e-3;
  double positions_margin = 30e-3;
  Vec3 positions_orientation = Vec3::UnitZ();
};

// Throws ConfigError with the offending key on any schema violation,
// including unknown keys. Relative array file paths resolve against base_dir.
ExperimentConfig parse_experiment_config(std::string_view yaml_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Built-in presets, one per experiment family.
std::vector<std::string> preset_names();
std::optional<std::string_view> preset_source(std::string_view name);

// Preset name, or path to a config file.
ExperimentConfig load_preset_or_file(const std::string& name_or_path);

// Overrides applied by the CLI flags.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> noise_sigma;  // T, isotropic
  std::optional<int> trials;
};

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides);

// Echo of the effective config in file units, for meta.json.
std::string config_echo_json(const ExperimentConfig& config, int indent = 2);

}  // namespace maglocate
