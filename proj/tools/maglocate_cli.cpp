// maglocate: simulate magnetometer readings, localize a magnet, and run the
// sensor-array experiments.
//
//   maglocate simulate --array four_by_m:5 --pose 0,0,40,0,0,1 --noise-sigma 1 --frames 8 -o stream.csv
//   maglocate localize --array four_by_m:5 --readings stream.csv --filter-window 4
//   maglocate experiment five_positions --out-dir runs/five --seed 7
//   maglocate filter-compare --trials 50
//
// Lengths on the command line are millimeters, fields microtesla.

#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "maglocate/experiment.hpp"
#include "maglocate/localization.hpp"
#include "maglocate/measurement.hpp"
#include "maglocate/metrics.hpp"
#include "maglocate/report.hpp"
#include "maglocate/scenario_config.hpp"
#include "maglocate/sensor_array.hpp"

namespace {

using namespace maglocate;

constexpr int kExitRuntimeError = 1;
constexpr int kExitConfigError = 2;

// "four_by_m:5", "two_by_n:8", "two_by_n:1!" (permissive) or a path to an array file.
SensorArray parse_array_arg(const std::string& text) {
  const auto colon = text.find(':');
  if (colon != std::string::npos && !std::filesystem::exists(text)) {
    std::string count = text.substr(colon + 1);
    ReferenceLayoutOptions options;
    if (!count.empty() && count.back() == '!') {
      options.permissive = true;
      count.pop_back();
    }
    LayoutFamily family;
    try {
      family = parse_layout_family(text.substr(0, colon));
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    int n = 0;
    try {
      n = std::stoi(count);
    } catch (const std::exception&) {
      throw ConfigError("--array: bad sensor count '" + count + "'");
    }
    try {
      return reference_layout(family, n, options);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("--array: ") + e.what());
    }
  }
  if (!std::filesystem::exists(text)) {
    throw ConfigError("--array: '" + text + "' is neither FAMILY:COUNT nor an existing file");
  }
  return load_array(text);
}

// "x,y,z,m,n,p" with position in mm.
MagnetPose parse_pose_arg(const std::string& text, const char* flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError(std::string(flag) + ": bad number '" + item + "'");
    }
  }
  if (v.size() != 6) throw ConfigError(std::string(flag) + ": expected x,y,z,m,n,p (mm, direction)");
  try {
    return make_pose(Vec3(v[0], v[1], v[2]) * kMillimeter, Vec3(v[3], v[4], v[5]));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string(flag) + ": " + e.what());
  }
}

MagnetSpec magnet_from(double length_mm, double radius_mm, double magnetization) {
  MagnetSpec spec;
  spec.length = length_mm * kMillimeter;
  spec.radius = radius_mm * kMillimeter;
  spec.magnetization = magnetization;
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

struct MagnetOptions {
  double length_mm = 2.0;
  double radius_mm = 1.0;
  double magnetization = 8e5;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--magnet-length", length_mm, "Magnet length in mm")->capture_default_str();
    cmd->add_option("--magnet-radius", radius_mm, "Magnet radius in mm")->capture_default_str();
    cmd->add_option("--magnetization", magnetization, "Magnetization M0 in A/m")->capture_default_str();
  }

  MagnetSpec spec() const { return magnet_from(length_mm, radius_mm, magnetization); }
};

void print_pose(std::ostream& os, const MagnetPose& pose) {
  const Vec3 p = pose.position / kMillimeter;
  os << std::fixed << std::setprecision(4) << "position_mm  " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n'
     << std::setprecision(6) << "orientation  " << pose.orientation.x() << ' ' << pose.orientation.y() << ' '
     << pose.orientation.z() << '\n';
  os.unsetf(std::ios::floatfield);
}

void print_aggregates(std::ostream& os, const std::vector<ResultTable>& tables) {
  os << std::left << std::setw(34) << "scenario" << std::setw(14) << "group" << std::right << std::setw(6) << "ok"
     << std::setw(6) << "fail" << std::setw(12) << "Ep mean" << std::setw(12) << "Ep max" << std::setw(12)
     << "theta mean" << std::setw(12) << "theta max" << '\n';
  for (const auto& t : tables) {
    for (const auto& a : t.aggregates) {
      os << std::left << std::setw(34) << a.scenario << std::setw(14) << a.group << std::right << std::setw(6)
         << a.n_ok << std::setw(6) << a.n_failed;
      if (a.n_ok > 0) {
        os << std::fixed << std::setprecision(4) << std::setw(12) << a.summary.position.mean << std::setw(12)
           << a.summary.position.max << std::setw(12) << a.summary.angle.mean << std::setw(12)
           << a.summary.angle.max;
        os.unsetf(std::ios::floatfield);
      }
      os << '\n';
    }
  }
  os << "(Ep in mm, theta in degrees)\n";
}

struct RunFlags {
  std::optional<std::uint64_t> seed;
  std::optional<double> noise_sigma_uT;
  std::optional<int> trials;
  std::string out_dir;
  bool quiet = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--noise-sigma", noise_sigma_uT, "Isotropic noise sigma in uT");
    cmd->add_option("--trials", trials, "Trials per pose");
    cmd->add_option("--out-dir", out_dir, "Run directory (default runs/<name>)");
    cmd->add_flag("-q,--quiet", quiet, "Do not print the aggregate table");
  }
};

int run_experiment_command(ExperimentConfig config, const RunFlags& flags) {
  ConfigOverrides overrides;
  overrides.seed = flags.seed;
  if (flags.noise_sigma_uT) overrides.noise_sigma = *flags.noise_sigma_uT * kMicrotesla;
  overrides.trials = flags.trials;
  apply_overrides(config, overrides);

  const ExperimentOutput output = run_experiment(config);
  const std::filesystem::path dir =
      flags.out_dir.empty() ? std::filesystem::path("runs") / config.scenario.name : std::filesystem::path(flags.out_dir);
  write_run_directory(config, output, dir);
  if (!flags.quiet) {
    print_aggregates(std::cout, output.tables);
    if (output.filter) {
      const Vec3 r = output.filter->residual_overall / kMicrotesla;
      std::cout << "mean |raw - filtered| (uT): x " << r.x() << "  y " << r.y() << "  z " << r.z() << '\n';
    }
  }
  std::cout << "wrote " << dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Permanent-magnet localization from 3-axis magnetometer arrays"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // simulate ---------------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic reading stream (CSV, tesla)");
  std::string sim_array, sim_pose, sim_out;
  double sim_sigma = 0.0;
  std::size_t sim_frames = 1;
  std::uint64_t sim_seed = 1;
  bool sim_no_quantize = false;
  MagnetOptions sim_magnet;
  simulate->add_option("--array", sim_array, "FAMILY:COUNT (append ! for any count) or array file")->required();
  simulate->add_option("--pose", sim_pose, "Magnet pose x,y,z,m,n,p (mm, direction)")->required();
  simulate->add_option("--noise-sigma", sim_sigma, "Noise sigma in uT")->capture_default_str();
  simulate->add_option("--frames", sim_frames, "Number of frames")->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "Seed")->capture_default_str();
  simulate->add_flag("--no-quantize", sim_no_quantize, "Skip ADC quantization");
  simulate->add_option("-o,--out", sim_out, "Output CSV (default stdout)");
  sim_magnet.add_to(simulate);

  // localize ---------------------------------------------------------------
  auto* loc = app.add_subcommand("localize", "Estimate the magnet pose from a reading stream");
  std::string loc_array, loc_readings, loc_truth, loc_strategy = "centroid";
  std::optional<std::size_t> loc_frame;
  std::size_t loc_window = 1, loc_warmup = 0;
  int loc_starts = 8;
  bool loc_json = false;
  MagnetOptions loc_magnet;
  loc->add_option("--array", loc_array, "FAMILY:COUNT or array file")->required();
  loc->add_option("--readings", loc_readings, "Reading stream CSV")->required()->check(CLI::ExistingFile);
  loc->add_option("--frame", loc_frame, "Frame position to use after trim/filter (default last)");
  loc->add_option("--filter-window", loc_window, "Moving-average window")->capture_default_str();
  loc->add_option("--warmup", loc_warmup, "Frames to drop before filtering")->capture_default_str();
  loc->add_option("--strategy", loc_strategy, "Initial guess strategy")
      ->capture_default_str()
      ->check(CLI::IsMember({"centroid", "grid"}));
  loc->add_option("--starts", loc_starts, "Multistart count")->capture_default_str()->check(CLI::PositiveNumber);
  loc->add_option("--truth", loc_truth, "True pose x,y,z,m,n,p for error metrics");
  loc->add_flag("--json", loc_json, "Print a JSON report");
  loc_magnet.add_to(loc);

  // experiment -------------------------------------------------------------
  auto* experiment = app.add_subcommand("experiment", "Run a preset or scenario config file");
  std::string exp_target;
  bool exp_list = false;
  RunFlags exp_flags;
  experiment->add_option("target", exp_target, "Preset name or YAML config path");
  experiment->add_flag("--list", exp_list, "List built-in presets");
  exp_flags.add_to(experiment);

  // filter-compare ---------------------------------------------------------
  auto* filter_cmp = app.add_subcommand("filter-compare", "Filtered vs raw localization on paired noise");
  std::string fc_target = "filter_comparison";
  std::optional<std::size_t> fc_window;
  RunFlags fc_flags;
  filter_cmp->add_option("target", fc_target, "Preset name or YAML config path")->capture_default_str();
  filter_cmp->add_option("--window", fc_window, "Moving-average window");
  fc_flags.add_to(filter_cmp);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      if (sim_sigma < 0) throw ConfigError("--noise-sigma must be non-negative");
      const SensorArray array = parse_array_arg(sim_array);
      const MagnetPose pose = parse_pose_arg(sim_pose, "--pose");
      SensorModel model = SensorModel::isotropic(sim_sigma * kMicrotesla);
      model.quantize = !sim_no_quantize;
      const ReadingStream stream = simulate_stream(array, pose, sim_magnet.spec(), model, sim_seed, sim_frames);
      if (sim_out.empty()) {
        write_stream_csv(std::cout, stream);
      } else {
        save_stream_csv(stream, sim_out);
      }
      return 0;
    }

    if (loc->parsed()) {
      const SensorArray array = parse_array_arg(loc_array);
      const MagnetSpec magnet = loc_magnet.spec();
      ReadingStream stream = load_stream_csv(loc_readings);
      if (stream.sensor_count() != array.size()) {
        throw ConfigError("readings have " + std::to_string(stream.sensor_count()) + " sensors, array has " +
                          std::to_string(array.size()));
      }
      stream = warmup_trim(stream, loc_warmup);
      if (loc_window == 0) throw ConfigError("--filter-window must be >= 1");
      if (loc_window > 1) stream = moving_average_filter(stream, loc_window);
      const std::size_t index = loc_frame.value_or(stream.size() - 1);
      if (index >= stream.size()) throw ConfigError("--frame is past the end of the stream");

      SolverConfig solver;
      solver.strategy = parse_init_strategy(loc_strategy);
      solver.multistart_count = loc_starts;
      const EstimateReport report = localize(stream.frames[index], array, magnet, solver);

      std::optional<PoseError> error;
      if (!loc_truth.empty()) error = pose_error(report.pose, parse_pose_arg(loc_truth, "--truth"));

      if (loc_json) {
        nlohmann::json j;
        const Vec3 p = report.pose.position / kMillimeter;
        j["position_mm"] = {p.x(), p.y(), p.z()};
        j["orientation"] = {report.pose.orientation.x(), report.pose.orientation.y(), report.pose.orientation.z()};
        j["converged"] = report.converged;
        j["termination"] = to_string(report.termination);
        j["iterations"] = report.iterations;
        j["final_cost"] = report.final_cost;
        j["residual_rms_uT"] = report.residual_rms / kMicrotesla;
        if (error) {
          const PoseError e = to_report_units(*error);
          j["Ep_mm"] = e.position;
          j["Eo"] = e.orientation;
          j["theta_deg"] = e.angle;
        }
        std::cout << j.dump(2) << '\n';
      } else {
        print_pose(std::cout, report.pose);
        std::cout << "converged    " << (report.converged ? "yes" : "no") << " (" << to_string(report.termination)
                  << ", " << report.iterations << " iterations)\n"
                  << "residual_rms " << report.residual_rms / kMicrotesla << " uT\n";
        if (error) {
          const PoseError e = to_report_units(*error);
          std::cout << "Ep           " << e.position << " mm\n"
                    << "Eo           " << e.orientation << "\n"
                    << "theta        " << e.angle << " deg\n";
        }
      }
      return report.termination == TerminationReason::kNoSignal ? kExitRuntimeError : 0;
    }

    if (experiment->parsed()) {
      if (exp_list) {
        for (const auto& name : preset_names()) std::cout << name << '\n';
        return 0;
      }
      if (exp_target.empty()) throw ConfigError("experiment: give a preset name or config path (see --list)");
      return run_experiment_command(load_preset_or_file(exp_target), exp_flags);
    }

    if (filter_cmp->parsed()) {
      ExperimentConfig config = load_preset_or_file(fc_target);
      config.kind = ExperimentKind::kFilterComparison;
      if (fc_window) {
        if (*fc_window < 1) throw ConfigError("--window must be >= 1");
        config.scenario.filter.window = *fc_window;
      }
      if (config.scenario.poses.empty()) throw ConfigError("filter-compare needs explicit poses in the config");
      return run_experiment_command(std::move(config), fc_flags);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return 0;
}
