#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "maglocate/report.hpp"
#include "maglocate/scenario_config.hpp"

namespace maglocate {
namespace {

constexpr const char* kMinimal = R"(
name: mini
seed: 5
trials: 3
poses:
  - label: p
    position_mm: [1, 2, 40]
    orientation: [0, 0, 2]
)";

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TEST(Config, MinimalScenarioDefaults) {
  const ExperimentConfig c = parse_experiment_config(kMinimal);
  EXPECT_EQ(c.kind, ExperimentKind::kScenario);
  EXPECT_EQ(c.scenario.name, "mini");
  EXPECT_EQ(c.scenario.seed, 5u);
  EXPECT_EQ(c.scenario.trials, 3);
  ASSERT_EQ(c.scenario.poses.size(), 1u);
  EXPECT_LT((c.scenario.poses[0].pose.position - Vec3(1e-3, 2e-3, 40e-3)).norm(), 1e-15);
  EXPECT_EQ(c.scenario.poses[0].pose.orientation, Vec3::UnitZ());
  EXPECT_EQ(c.scenario.array.build().size(), 20u);
}

TEST(Config, FullSchema) {
  const ExperimentConfig c = parse_experiment_config(R"(
name: full
experiment: filter_comparison
array:
  grid: {rows: 2, cols: 3, pitch_x_mm: 10, pitch_y_mm: 20, centered: true}
magnet: {length_mm: 4, radius_mm: 1.5, magnetization_A_per_m: 1.0e6, mu_r: 1.05}
sensor: {noise_sigma_uT: [1, 2, 3], quantize: false, resolution_uT: 0.1, full_scale_uT: 1000}
filter: {enabled: true, window: 8, groups: 2, warmup: 3}
solver: {max_iterations: 50, multistart_count: 3, strategy: grid, workspace_margin_mm: 100, workspace_height_mm: 150}
poses:
  - {label: a, position_mm: [0, 0, 30], orientation: [1, 0, 0]}
)");
  const Scenario& s = c.scenario;
  EXPECT_EQ(c.kind, ExperimentKind::kFilterComparison);
  EXPECT_EQ(s.array.build().size(), 6u);
  EXPECT_DOUBLE_EQ(s.magnet.length, 4e-3);
  EXPECT_DOUBLE_EQ(s.magnet.mu_r, 1.05);
  EXPECT_DOUBLE_EQ(s.sensor.noise_sigma.z(), 3e-6);
  EXPECT_FALSE(s.sensor.quantize);
  EXPECT_EQ(s.filter.frame_count(), 19u);
  EXPECT_EQ(s.solver.strategy, InitStrategy::kGrid);
  EXPECT_DOUBLE_EQ(s.solver.workspace_height, 0.15);
}

TEST(Config, RandomPoses) {
  const ExperimentConfig c = parse_experiment_config(R"(
random_poses: {count: 12, lower_mm: [-10, -10, 30], upper_mm: [10, 10, 60], orientation: random}
)");
  EXPECT_EQ(c.scenario.poses.size(), 12u);
}

TEST(Config, ErrorsNameTheKey) {
  auto message = [](const std::string& yaml) {
    try {
      parse_experiment_config(yaml);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string poses = "poses: [{label: a, position_mm: [0, 0, 40]}]\n";
  EXPECT_NE(message(poses + "magnet: {lenght_mm: 2}\n").find("magnet.lenght_mm"), std::string::npos);
  EXPECT_NE(message(poses + "trials: many\n").find("trials"), std::string::npos);
  EXPECT_NE(message(poses + "colour: blue\n").find("colour"), std::string::npos);
  EXPECT_NE(message(poses + "array: {family: five_by_k}\n").find("five_by_k"), std::string::npos);
  EXPECT_NE(message("name: x\n").find("poses"), std::string::npos);
  EXPECT_NE(message(poses + "experiment: sensor_count\n").find("sensor_count.sizes"), std::string::npos);
  EXPECT_NE(message(poses + "experiment: sensor_count\nsensor_count: {sizes: []}\n").find("sizes"),
            std::string::npos);
  EXPECT_NE(message("poses: [{label: a, position_mm: [0, 0, 40]}, {label: a, position_mm: [0, 0, 50]}]\n")
                .find("duplicate"),
            std::string::npos);
  EXPECT_NE(message("{unclosed").find("YAML"), std::string::npos);
  EXPECT_NE(message(poses + "sensor: {noise_sigma_uT: -1}\n"), "no error");
}

TEST(Config, AllPresetsParse) {
  const auto names = preset_names();
  EXPECT_EQ(names.size(), 5u);
  for (const auto& n : names) {
    ExperimentConfig c;
    ASSERT_NO_THROW(c = load_preset_or_file(n)) << n;
    EXPECT_GE(c.scenario.trials, 200) << n;
    EXPECT_EQ(c.scenario.sensor.noise_sigma, Vec3::Constant(1e-6)) << n;
  }
  EXPECT_THROW(load_preset_or_file("no_such_preset"), ConfigError);
}

TEST(Config, Overrides) {
  ExperimentConfig c = parse_experiment_config(kMinimal);
  apply_overrides(c, ConfigOverrides{9u, 2e-6, 1});
  EXPECT_EQ(c.scenario.seed, 9u);
  EXPECT_EQ(c.scenario.trials, 1);
  EXPECT_EQ(c.scenario.sensor.noise_sigma, Vec3::Constant(2e-6));
  EXPECT_THROW(apply_overrides(c, ConfigOverrides{std::nullopt, -1.0, std::nullopt}), ConfigError);
  EXPECT_THROW(apply_overrides(c, ConfigOverrides{std::nullopt, std::nullopt, 0}), ConfigError);
}

TEST(Config, EchoIsValidJsonInFileUnits) {
  const auto j = nlohmann::json::parse(config_echo_json(parse_experiment_config(kMinimal)));
  EXPECT_EQ(j["name"], "mini");
  EXPECT_DOUBLE_EQ(j["poses"][0]["position_mm"][2].get<double>(), 40.0);
  EXPECT_DOUBLE_EQ(j["magnet"]["length_mm"].get<double>(), 2.0);
}

TEST(Config, ArrayFileRelativeToConfig) {
  const auto dir = std::filesystem::temp_directory_path() / "maglocate_cfg_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "arr.txt") << "# layout: tri\n0 0 0\n0.03 0 0\n0 0.03 0\n";
    std::ofstream(dir / "cfg.yaml") << "array: {file: arr.txt}\n"
                                       "poses: [{label: a, position_mm: [10, 10, 40]}]\n";
  }
  const ExperimentConfig c = load_experiment_config(dir / "cfg.yaml");
  EXPECT_EQ(c.scenario.array.build().name(), "tri");
  std::filesystem::remove_all(dir);
}

TEST(RunDirectory, ByteIdenticalReruns) {
  ExperimentConfig c = load_preset_or_file("filter_comparison");
  apply_overrides(c, ConfigOverrides{std::nullopt, std::nullopt, 5});
  const auto root = std::filesystem::temp_directory_path() / "maglocate_rerun_test";
  write_run_directory(c, run_experiment(c), root / "a");
  write_run_directory(c, run_experiment(c), root / "b");
  for (const char* f : {"results.csv", "aggregates.csv", "meta.json", "noise_residuals.csv"}) {
    const std::string a = read_file(root / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, read_file(root / "b" / f)) << f;
  }
  const auto meta = nlohmann::json::parse(read_file(root / "a" / "meta.json"));
  EXPECT_EQ(meta["seed"], c.scenario.seed);
  EXPECT_EQ(meta["version"], kVersion);
  EXPECT_EQ(meta["tables"].size(), 2u);
  std::filesystem::remove_all(root);
}

TEST(RunDirectory, ResultRowCount) {
  ExperimentConfig c = load_preset_or_file("five_positions");
  apply_overrides(c, ConfigOverrides{std::nullopt, std::nullopt, 3});
  const ExperimentOutput out = run_experiment(c);
  std::stringstream csv;
  write_results_csv(csv, out.tables);
  std::string line;
  int n = -1;
  while (std::getline(csv, line)) ++n;
  EXPECT_EQ(n, 15);
}

}  // namespace
}  // namespace maglocate
