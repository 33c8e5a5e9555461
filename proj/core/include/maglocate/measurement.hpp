#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "maglocate/common.hpp"
#include "maglocate/field_model.hpp"
#include "maglocate/sensor_array.hpp"

namespace maglocate {

// 3-axis magnetometer characteristics. Defaults follow the MLX90393:
// 0.161 uT per LSB, 44,000 uT full scale.
struct SensorModel {
  double resolution = 0.161e-6;    // T per LSB
  double full_scale = 44000e-6;    // T
  Vec3 noise_sigma = Vec3::Zero(); // per-axis Gaussian std, T
  bool quantize = true;

  static SensorModel isotropic(double sigma) {
    SensorModel m;
    m.noise_sigma = Vec3::Constant(sigma);
    return m;
  }

  void validate() const;
};

// One frame: a flux triple per sensor in array order.
struct ReadingSet {
  std::vector<FluxVector> readings;
  std::vector<bool> saturated;

  std::size_t size() const noexcept { return readings.size(); }

  static ReadingSet zeros(std::size_t n) {
    return ReadingSet{std::vector<FluxVector>(n, FluxVector::Zero()), std::vector<bool>(n, false)};
  }
};

// Time-ordered frames with identical sensor counts.
struct ReadingStream {
  std::vector<ReadingSet> frames;
  std::vector<std::size_t> sample_index;

  std::size_t size() const noexcept { return frames.size(); }
  std::size_t sensor_count() const noexcept { return frames.empty() ? 0 : frames.front().size(); }

  void push_back(ReadingSet frame);  // throws InvalidArgument on sensor-count mismatch
};

// Applies the sensor chain to a true field value: round-to-nearest on the
// resolution grid (if enabled), then clip to +-full_scale. Sets `saturated`
// when clipping happened.
FluxVector digitize(const FluxVector& value, const SensorModel& model, bool& saturated);

// truth = dipole flux, + N(0, sigma) per axis, then digitize. Deterministic in seed.
ReadingSet simulate_readings(const SensorArray& array, const MagnetPose& pose, const MagnetSpec& spec,
                             const SensorModel& model, std::uint64_t seed);

// `frames` consecutive frames of a static magnet; one generator shared across
// frames so each frame gets fresh noise.
ReadingStream simulate_stream(const SensorArray& array, const MagnetPose& pose, const MagnetSpec& spec,
                              const SensorModel& model, std::uint64_t seed, std::size_t frames);

// Causal moving average: output frame k is the mean of input frames
// max(0, k-window+1)..k. Saturation flags are OR-ed over the window.
ReadingStream moving_average_filter(const ReadingStream& stream, std::size_t window);

// Drops the first `cycles` frames; throws if nothing would remain.
ReadingStream warmup_trim(const ReadingStream& stream, std::size_t cycles);

// Per-axis mean |raw - filtered| over all frames and sensors.
Vec3 noise_residual_stats(const ReadingStream& raw, const ReadingStream& filtered);

// CSV: header "frame,sensor,bx,by,bz,saturated"; tesla; one row per sensor per frame.
void write_stream_csv(std::ostream& out, const ReadingStream& stream);
ReadingStream read_stream_csv(std::istream& in);
void save_stream_csv(const ReadingStream& stream, const std::filesystem::path& path);
ReadingStream load_stream_csv(const std::filesystem::path& path);

}  // namespace maglocate
