#include <benchmark/benchmark.h>

#include "maglocate/field_model.hpp"
#include "maglocate/localization.hpp"
#include "maglocate/measurement.hpp"
#include "maglocate/sensor_array.hpp"

namespace {

using namespace maglocate;

const MagnetPose kPose = make_pose(Vec3(0.01, -0.005, 0.04), Vec3(0.3, 0.2, 1.0));

void BM_Flux(benchmark::State& state) {
  const DipoleField field(MagnetSpec{});
  const Vec3 sensor(0.03, 0.0, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(field.flux(kPose, sensor));
}
BENCHMARK(BM_Flux);

void BM_Jacobian(benchmark::State& state) {
  const DipoleField field(MagnetSpec{});
  const Vec3 sensor(0.03, 0.0, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(field.jacobian(kPose, sensor));
}
BENCHMARK(BM_Jacobian);

void BM_LinearizeArray(benchmark::State& state) {
  const SensorArray array = reference_layout(LayoutFamily::kFourByM, static_cast<int>(state.range(0)));
  const MagnetSpec spec;
  const ReadingSet readings = simulate_readings(array, kPose, spec, SensorModel::isotropic(0.0), 1);
  const LocalizationProblem problem(readings, array, spec);
  const PoseParams params = to_params(kPose);
  Eigen::VectorXd r;
  LocalizationProblem::Jacobian j;
  for (auto _ : state) {
    problem.linearize(params, r, j);
    benchmark::DoNotOptimize(j.data());
  }
}
BENCHMARK(BM_LinearizeArray)->Arg(2)->Arg(5);

void BM_Localize(benchmark::State& state) {
  const SensorArray array = reference_layout(LayoutFamily::kFourByM, 5);
  const MagnetSpec spec;
  const ReadingSet readings = simulate_readings(array, kPose, spec, SensorModel::isotropic(1e-6), 7);
  SolverConfig config;
  config.multistart_count = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(localize(readings, array, spec, config));
}
BENCHMARK(BM_Localize)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
