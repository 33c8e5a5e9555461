#include "maglocate/report.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>

namespace maglocate {

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  ExperimentOutput out;
  const Scenario& s = config.scenario;
  switch (config.kind) {
    case ExperimentKind::kScenario:
      out.tables.push_back(run_scenario(s));
      break;
    case ExperimentKind::kSensorCount:
      for (auto& sized : experiment_sensor_count(config.count_family, config.sizes, s)) {
        out.tables.push_back(std::move(sized.table));
      }
      break;
    case ExperimentKind::kGeometry:
      out.tables.push_back(experiment_geometry(config.axis, config.offsets, s, config.sweep_orientation));
      break;
    case ExperimentKind::kPositions: {
      std::vector<LabeledPose> positions = s.poses;
      if (positions.empty()) {
        positions = canonical_positions(s.array.build(), config.positions_height, config.positions_margin,
                                        config.positions_orientation);
      }
      out.tables.push_back(experiment_positions(positions, s));
      break;
    }
    case ExperimentKind::kFilterComparison: {
      FilterComparison cmp = experiment_filter_comparison(s);
      out.tables.push_back(cmp.raw);
      out.tables.push_back(cmp.filtered);
      out.filter = std::move(cmp);
      break;
    }
  }
  return out;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string csv_text(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return text;
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<ResultTable>& tables) {
  out << "scenario,pose_id,pose_label,trial,status,Ep_mm,Eo,theta_deg,converged,iterations,final_cost,"
         "termination,est_x_mm,est_y_mm,est_z_mm,est_m,est_n,est_p,message\n";
  for (const auto& table : tables) {
    for (const auto& r : table.rows) {
      out << csv_text(r.scenario) << ',' << r.pose_index << ',' << csv_text(r.pose_label) << ',' << r.trial << ',';
      if (r.ok) {
        const PoseError e = to_report_units(r.error);
        out << "ok," << format_double(e.position) << ',' << format_double(e.orientation) << ','
            << format_double(e.angle) << ',' << (r.converged ? 1 : 0) << ',' << r.iterations << ','
            << format_double(r.final_cost) << ',' << to_string(r.termination);
        const Vec3 p = r.estimate.position / kMillimeter;
        const Vec3& h = r.estimate.orientation;
        out << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(p.z()) << ','
            << format_double(h.x()) << ',' << format_double(h.y()) << ',' << format_double(h.z()) << ",\n";
      } else {
        // Ep, Eo, theta empty; converged 0; iterations 0; cost, termination and estimate empty.
        out << "failed" << ",,," << ",0,0" << ",," << ",,,,,," << ',' << csv_text(r.failure) << '\n';
      }
    }
  }
}

void write_aggregates_csv(std::ostream& out, const std::vector<ResultTable>& tables) {
  out << "scenario,group,n_ok,n_failed,Ep_mean_mm,Ep_max_mm,Ep_min_mm,Eo_mean,Eo_max,Eo_min,"
         "theta_mean_deg,theta_max_deg,theta_min_deg\n";
  for (const auto& table : tables) {
    for (const auto& a : table.aggregates) {
      out << csv_text(a.scenario) << ',' << csv_text(a.group) << ',' << a.n_ok << ',' << a.n_failed;
      if (a.n_ok == 0) {
        out << ",,,,,,,,,\n";
        continue;
      }
      for (const Stats* s : {&a.summary.position, &a.summary.orientation, &a.summary.angle}) {
        out << ',' << format_double(s->mean) << ',' << format_double(s->max) << ',' << format_double(s->min);
      }
      out << '\n';
    }
  }
}

void write_noise_residuals_csv(std::ostream& out, const Scenario& scenario, const FilterComparison& comparison) {
  out << "group,mean_abs_dx_uT,mean_abs_dy_uT,mean_abs_dz_uT\n";
  auto line = [&out](const std::string& group, const Vec3& v) {
    const Vec3 u = v / kMicrotesla;
    out << csv_text(group) << ',' << format_double(u.x()) << ',' << format_double(u.y()) << ','
        << format_double(u.z()) << '\n';
  };
  for (std::size_t p = 0; p < comparison.residual_per_pose.size() && p < scenario.poses.size(); ++p) {
    line(scenario.poses[p].label, comparison.residual_per_pose[p]);
  }
  line(kAllGroup, comparison.residual_overall);
}

std::string meta_json(const ExperimentConfig& config, const ExperimentOutput& output) {
  using nlohmann::json;
  json j;
  j["tool"] = "maglocate";
  j["version"] = kVersion;
  j["experiment"] = to_string(config.kind);
  j["seed"] = config.scenario.seed;
  j["config"] = json::parse(config_echo_json(config));
  json tables = json::array();
  for (const auto& t : output.tables) {
    const AggregateRow& all = t.overall();
    tables.push_back({{"scenario", t.scenario}, {"rows", t.rows.size()}, {"n_ok", all.n_ok}, {"n_failed", all.n_failed}});
  }
  j["tables"] = tables;
  if (output.filter) {
    const Vec3 r = output.filter->residual_overall / kMicrotesla;
    j["noise_residual_uT"] = {r.x(), r.y(), r.z()};
  }
  return j.dump(2) + "\n";
}

void write_run_directory(const ExperimentConfig& config, const ExperimentOutput& output,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&dir](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw Error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("results.csv");
    write_results_csv(f, output.tables);
  }
  {
    auto f = open("aggregates.csv");
    write_aggregates_csv(f, output.tables);
  }
  {
    auto f = open("meta.json");
    f << meta_json(config, output);
  }
  if (output.filter) {
    auto f = open("noise_residuals.csv");
    write_noise_residuals_csv(f, config.scenario, *output.filter);
  }
}

}  // namespace maglocate
