// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "maglocate/experiment.hpp"
#include "maglocate/localization.hpp"
#include "maglocate/metrics.hpp"
#include "maglocate/report.hpp"
#include "maglocate/scenario_config.hpp"
#include "oracles.hpp"

namespace {

using namespace maglocate;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double t = seconds_since(t0);
  const bool in_time = t < limit_s;
  if (!in_time) o.detail += "; over time budget";
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s  %2d  %-32s %s [%.2fs / %.0fs]\n", pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), t,
              limit_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Two runs of every preset; criteria 4-7 read the first, criterion 9 compares them.
struct PresetRuns {
  ExperimentConfig config;
  ExperimentOutput first;
  std::string first_csv;
  std::string second_csv;
  double first_s = 0;
  double second_s = 0;
};

std::map<std::string, PresetRuns> g_runs;

std::string results_csv(const ExperimentOutput& out) {
  std::ostringstream os;
  write_results_csv(os, out.tables);
  return os.str();
}

const PresetRuns& preset(const std::string& name) {
  auto it = g_runs.find(name);
  if (it != g_runs.end()) return it->second;
  PresetRuns r;
  r.config = load_preset_or_file(name);
  auto t0 = Clock::now();
  r.first = run_experiment(r.config);
  r.first_csv = results_csv(r.first);
  r.first_s = seconds_since(t0);
  return g_runs.emplace(name, std::move(r)).first->second;
}

const AggregateRow& group_of(const ResultTable& t, const std::string& g) { return t.group(g); }

Outcome noiseless_round_trip() {
  Scenario s;
  s.name = "acceptance_noiseless";
  s.seed = 1;
  s.trials = 1;
  s.sensor = SensorModel::isotropic(0.0);
  s.sensor.quantize = false;
  s.array.family = LayoutFamily::kFourByM;
  s.array.size = 5;
  const SensorArray array = s.array.build();
  PoseSampler sampler;
  sampler.count = 100;
  sampler.lower = Vec3(array.min_corner().x() - 0.03, array.min_corner().y() - 0.03, 0.03);
  sampler.upper = Vec3(array.max_corner().x() + 0.03, array.max_corner().y() + 0.03, 0.2);
  s.poses = sample_poses(sampler, 20240601);
  const ResultTable t = run_scenario(s);
  int converged = 0;
  double max_ep = 0, max_theta = 0;
  for (const auto& r : t.rows) {
    if (!r.ok) continue;
    if (r.converged) ++converged;
    max_ep = std::max(max_ep, r.error.position);
    max_theta = std::max(max_theta, r.error.angle);
  }
  const bool pass = converged == 100 && max_ep < 1e-6 && max_theta < 1e-5;
  return {pass, fmt("converged %.0f/100, max Ep %.3g m (< 1e-6), max theta %.3g rad (< 1e-5)", converged, max_ep,
                    max_theta)};
}

Outcome jacobian_check() {
  Rng rng(77);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const int m = 2 + static_cast<int>(rng.uniform() * 4);
    const SensorArray array = reference_layout(LayoutFamily::kFourByM, m);
    const MagnetPose truth{Vec3(rng.uniform(-0.06, 0.06), rng.uniform(-0.08, 0.08), rng.uniform(0.02, 0.2)),
                           test::random_unit(rng)};
    SensorModel model = SensorModel::isotropic(1e-6);
    const ReadingSet r = simulate_readings(array, truth, MagnetSpec{}, model, static_cast<std::uint64_t>(i));
    const LocalizationProblem problem(r, array, MagnetSpec{});
    const PoseParams p = to_params(
        MagnetPose{truth.position + test::random_vec(rng, -0.01, 0.01), test::random_unit(rng)});
    Eigen::VectorXd res;
    LocalizationProblem::Jacobian jac;
    problem.linearize(p, res, jac);
    const double scale = (p.position - array.centroid()).norm();
    Eigen::MatrixXd fd(jac.rows(), 5);
    for (int k = 0; k < 5; ++k) {
      const double h = 1e-7 * (k < 3 ? scale : 1.0);
      PoseParams::Vector d = PoseParams::Vector::Zero();
      d[k] = h;
      fd.col(k) = (problem.residuals(p.with_vector(p.vector() + d)) - problem.residuals(p.with_vector(p.vector() - d))) /
                  (2 * h);
    }
    worst = std::max({worst, test::max_relative_error(jac.leftCols(3), fd.leftCols(3)),
                      test::max_relative_error(jac.rightCols(2), fd.rightCols(2))});
  }
  return {worst < 1e-5, fmt("max relative error %.3g over 1000 configs (< 1e-5)", worst)};
}

Outcome cylinder_oracle() {
  const MagnetSpec spec;
  const DipoleField field(spec);
  const int nr = 10, nphi = 36, nz = 30;
  Rng rng(99);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const Vec3 axis = test::random_unit(rng);
    const Vec3 s = test::random_unit(rng) * rng.uniform(0.03, 0.2);
    const Vec3 ref = test::cylinder_flux(spec, Vec3::Zero(), axis, s, nr, nphi, nz);
    const double got = field.flux(MagnetPose{Vec3::Zero(), axis}, s).norm();
    worst = std::max(worst, std::abs(got - ref.norm()) / ref.norm());
  }
  return {worst < 0.01, fmt("%.0f elements, max relative magnitude error %.3g at >= 30 mm (< 1e-2)",
                            nr * nphi * nz, worst)};
}

Outcome sensor_count_trend() {
  const PresetRuns& r = preset("sensor_count");
  if (r.config.scenario.trials < 200) return {false, "fewer than 200 trials"};
  std::string detail = "mean Ep mm:";
  bool strictly = true;
  double prev = INFINITY;
  for (const auto& t : r.first.tables) {
    const double m = t.overall().summary.position.mean;
    detail += fmt(" %.3f", m);
    strictly = strictly && m < prev && t.overall().n_failed == 0;
    prev = m;
  }
  return {strictly && r.first.tables.size() == 4, detail + " (4x2..4x5, strictly decreasing)"};
}

Outcome center_superiority() {
  const PresetRuns& r = preset("five_positions");
  if (r.config.scenario.trials < 200) return {false, "fewer than 200 trials"};
  const ResultTable& t = r.first.tables.at(0);
  const AggregateRow& c = group_of(t, "No.3");
  bool best = true;
  double next_ep = INFINITY, next_theta = INFINITY;
  for (const auto& a : t.aggregates) {
    if (a.group == "No.3" || a.group == kAllGroup) continue;
    next_ep = std::min(next_ep, a.summary.position.mean);
    next_theta = std::min(next_theta, a.summary.angle.mean);
  }
  best = c.summary.position.mean < next_ep && c.summary.angle.mean < next_theta;
  return {best, fmt("No.3 Ep %.3f mm vs next %.3f; theta %.3f deg vs next %.3f", c.summary.position.mean, next_ep,
                    c.summary.angle.mean, next_theta)};
}

Outcome filter_benefit() {
  const PresetRuns& r = preset("filter_comparison");
  const Scenario& s = r.config.scenario;
  if (s.trials < 200 || s.filter.window != 4 || s.array.size != 5) return {false, "preset does not match criterion"};
  const double raw = r.first.tables.at(0).overall().summary.position.mean;
  const double filt = r.first.tables.at(1).overall().summary.position.mean;
  return {filt < raw, fmt("filtered %.3f mm < raw %.3f mm", filt, raw)};
}

Outcome height_trend() {
  const PresetRuns& r = preset("height_sweep");
  const ResultTable& t = r.first.tables.at(0);
  std::string detail = "mean Ep mm:";
  bool ok = true;
  double prev = -1;
  for (const auto& a : t.aggregates) {
    if (a.group == kAllGroup) continue;
    detail += " " + a.group + "=" + fmt("%.3f", a.summary.position.mean);
    ok = ok && a.summary.position.mean >= prev;
    prev = a.summary.position.mean;
  }
  return {ok, detail + " (non-decreasing)"};
}

Outcome quantization_bound() {
  Rng rng(5);
  const SensorModel model;  // sigma 0, quantization on
  const MagnetSpec spec;
  const SensorArray one({Vec3::Zero()}, "one");
  double worst = 0;
  int saturated = 0;
  for (int i = 0; i < 10000; ++i) {
    const MagnetPose pose{test::random_unit(rng) * rng.uniform(0.005, 0.3), test::random_unit(rng)};
    const ReadingSet r = simulate_readings(one, pose, spec, model, static_cast<std::uint64_t>(i));
    if (r.saturated[0]) {
      ++saturated;
      continue;
    }
    worst = std::max(worst, (r.readings[0] - flux_at(pose, spec, one[0])).cwiseAbs().maxCoeff());
  }
  return {worst <= model.resolution / 2 && saturated == 0,
          fmt("max |reading - truth| %.6f uT (<= 0.0805), saturated %.0f", worst / 1e-6, saturated)};
}

Outcome determinism() {
  std::string detail;
  bool ok = true;
  for (const auto& name : preset_names()) {
    preset(name);
    PresetRuns& r = g_runs.at(name);
    const auto t0 = Clock::now();
    r.second_csv = results_csv(run_experiment(r.config));
    r.second_s = seconds_since(t0);
    const bool same = r.second_csv == r.first_csv;
    const bool fast = r.second_s <= 2 * r.first_s + 0.05;
    ok = ok && same && fast;
    detail += name + (same ? " identical" : " DIFFERS") + (fast ? "" : " SLOW") + "; ";
  }
  return {ok, detail};
}

Outcome metric_examples() {
  const MagnetPose x{Vec3::Zero(), Vec3::UnitX()};
  const MagnetPose y{Vec3::Zero(), Vec3::UnitY()};
  const MagnetPose nx{Vec3::Zero(), -Vec3::UnitX()};
  const MagnetPose far{Vec3(3e-3, 4e-3, 0), Vec3::UnitX()};
  const bool ok = position_error(x, x) == 0 && orientation_error(x, x) == 0 && orientation_angle(x, x) == 0 &&
                  position_error(x, far) == 5e-3 && orientation_error(x, y) == std::sqrt(2.0) &&
                  orientation_error(x, nx) == 2.0 && orientation_angle(x, y) * kRadToDeg == 90.0 &&
                  orientation_angle(x, nx) == 0.0;
  const ErrorSummary s = aggregate({PoseError{1, 0, 0}, PoseError{2, 0, 0}, PoseError{3, 0, 0}});
  const bool agg = s.position.mean == 2 && s.position.max == 3 && s.position.min == 1;
  return {ok && agg, "0, 5 mm, sqrt(2), 2, 90 deg, antipodal 0, mean/max/min of {1,2,3}"};
}

}  // namespace

int main() {
  std::printf("maglocate acceptance (%s)\n", kVersion);
  report(1, "noiseless round-trip", 30, noiseless_round_trip);
  report(2, "residual Jacobian vs differences", 10, jacobian_check);
  report(3, "dipole vs discretized cylinder", 60, cylinder_oracle);
  report(4, "sensor-count trend", 300, sensor_count_trend);
  report(5, "center-position superiority", 300, center_superiority);
  report(6, "filter benefit", 300, filter_benefit);
  report(7, "height trend", 300, height_trend);
  report(8, "quantization bound", 10, quantization_bound);
  double single = 0;
  for (const auto& [name, r] : g_runs) single += r.first_s;
  report(9, "determinism", 2 * single + 300, determinism);
  report(10, "metric examples", 1, metric_examples);
  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
