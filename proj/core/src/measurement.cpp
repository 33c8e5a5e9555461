#include "maglocate/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "maglocate/random.hpp"

namespace maglocate {

void SensorModel::validate() const {
  if (!(resolution > 0.0)) throw InvalidArgument("sensor resolution must be positive");
  if (!(full_scale > resolution)) throw InvalidArgument("sensor full scale must exceed the resolution");
  if (!noise_sigma.allFinite() || (noise_sigma.array() < 0.0).any()) {
    throw InvalidArgument("noise sigma must be finite and non-negative");
  }
}

void ReadingStream::push_back(ReadingSet frame) {
  if (!frames.empty() && frame.size() != sensor_count()) {
    throw InvalidArgument("frame has " + std::to_string(frame.size()) + " sensors, stream has " +
                          std::to_string(sensor_count()));
  }
  sample_index.push_back(sample_index.empty() ? 0 : sample_index.back() + 1);
  frames.push_back(std::move(frame));
}

FluxVector digitize(const FluxVector& value, const SensorModel& model, bool& saturated) {
  FluxVector out = value;
  if (model.quantize) {
    for (int k = 0; k < 3; ++k) out[k] = std::round(out[k] / model.resolution) * model.resolution;
  }
  saturated = false;
  for (int k = 0; k < 3; ++k) {
    if (out[k] > model.full_scale) {
      out[k] = model.full_scale;
      saturated = true;
    } else if (out[k] < -model.full_scale) {
      out[k] = -model.full_scale;
      saturated = true;
    }
  }
  return out;
}

namespace {

ReadingSet simulate_frame(const SensorArray& array, const MagnetPose& pose, const DipoleField& field,
                          const SensorModel& model, Rng& rng) {
  ReadingSet set;
  set.readings.reserve(array.size());
  set.saturated.reserve(array.size());
  for (const auto& sensor : array.positions()) {
    FluxVector b = field.flux(pose, sensor);
    for (int k = 0; k < 3; ++k) {
      // Draw even when sigma is zero so the stream layout does not depend on sigma.
      b[k] += model.noise_sigma[k] * rng.normal();
    }
    bool sat = false;
    set.readings.push_back(digitize(b, model, sat));
    set.saturated.push_back(sat);
  }
  return set;
}

}  // namespace

ReadingSet simulate_readings(const SensorArray& array, const MagnetPose& pose, const MagnetSpec& spec,
                             const SensorModel& model, std::uint64_t seed) {
  model.validate();
  Rng rng(seed);
  return simulate_frame(array, pose, DipoleField(spec), model, rng);
}

ReadingStream simulate_stream(const SensorArray& array, const MagnetPose& pose, const MagnetSpec& spec,
                              const SensorModel& model, std::uint64_t seed, std::size_t frames) {
  model.validate();
  Rng rng(seed);
  const DipoleField field(spec);
  ReadingStream stream;
  stream.frames.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    stream.push_back(simulate_frame(array, pose, field, model, rng));
  }
  return stream;
}

ReadingStream moving_average_filter(const ReadingStream& stream, std::size_t window) {
  if (window == 0) throw InvalidArgument("filter window must be >= 1");
  ReadingStream out;
  out.sample_index = stream.sample_index;
  out.frames.reserve(stream.size());
  const std::size_t n = stream.sensor_count();
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const std::size_t first = k + 1 >= window ? k + 1 - window : 0;
    const double count = static_cast<double>(k - first + 1);
    ReadingSet frame = ReadingSet::zeros(n);
    for (std::size_t s = 0; s < n; ++s) {
      // Mean as anchor + mean deviation: a constant window reproduces its value exactly.
      const FluxVector& anchor = stream.frames[first].readings[s];
      FluxVector dev = FluxVector::Zero();
      bool sat = false;
      for (std::size_t f = first; f <= k; ++f) {
        dev += stream.frames[f].readings[s] - anchor;
        sat = sat || stream.frames[f].saturated[s];
      }
      frame.readings[s] = anchor + dev / count;
      frame.saturated[s] = sat;
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

ReadingStream warmup_trim(const ReadingStream& stream, std::size_t cycles) {
  if (cycles >= stream.size()) {
    throw InvalidArgument("warmup trim of " + std::to_string(cycles) + " frames leaves an empty stream of " +
                          std::to_string(stream.size()));
  }
  ReadingStream out;
  out.frames.assign(stream.frames.begin() + static_cast<std::ptrdiff_t>(cycles), stream.frames.end());
  out.sample_index.assign(stream.sample_index.begin() + static_cast<std::ptrdiff_t>(cycles),
                          stream.sample_index.end());
  return out;
}

Vec3 noise_residual_stats(const ReadingStream& raw, const ReadingStream& filtered) {
  if (raw.size() != filtered.size() || raw.sensor_count() != filtered.sensor_count()) {
    throw InvalidArgument("noise_residual_stats: streams differ in shape");
  }
  if (raw.size() == 0 || raw.sensor_count() == 0) {
    throw InvalidArgument("noise_residual_stats: empty stream");
  }
  Vec3 sum = Vec3::Zero();
  for (std::size_t f = 0; f < raw.size(); ++f) {
    if (raw.frames[f].size() != filtered.frames[f].size()) {
      throw InvalidArgument("noise_residual_stats: frame sensor counts differ");
    }
    for (std::size_t s = 0; s < raw.frames[f].size(); ++s) {
      sum += (raw.frames[f].readings[s] - filtered.frames[f].readings[s]).cwiseAbs();
    }
  }
  return sum / static_cast<double>(raw.size() * raw.sensor_count());
}

void write_stream_csv(std::ostream& out, const ReadingStream& stream) {
  out << "frame,sensor,bx,by,bz,saturated\n";
  out << std::setprecision(17);
  for (std::size_t f = 0; f < stream.size(); ++f) {
    const auto& frame = stream.frames[f];
    const std::size_t index = f < stream.sample_index.size() ? stream.sample_index[f] : f;
    for (std::size_t s = 0; s < frame.size(); ++s) {
      const auto& b = frame.readings[s];
      out << index << ',' << s << ',' << b.x() << ',' << b.y() << ',' << b.z() << ','
          << (frame.saturated[s] ? 1 : 0) << '\n';
    }
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + text + "'", line_no);
  }
}

std::size_t parse_index(const std::string& text, int line_no) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError("bad index '" + text + "'", line_no);
  }
}

}  // namespace

ReadingStream read_stream_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty reading stream file", 0);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "frame,sensor,bx,by,bz,saturated") {
    throw ParseError("expected header 'frame,sensor,bx,by,bz,saturated'", line_no);
  }

  // frame id -> (sensor id -> reading); frames kept in first-seen order.
  std::vector<std::size_t> frame_ids;
  std::map<std::size_t, std::size_t> frame_slot;
  std::vector<std::map<std::size_t, std::pair<FluxVector, bool>>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 6) throw ParseError("expected 6 comma-separated fields", line_no);
    const std::size_t frame = parse_index(fields[0], line_no);
    const std::size_t sensor = parse_index(fields[1], line_no);
    const FluxVector b(parse_double(fields[2], line_no), parse_double(fields[3], line_no),
                       parse_double(fields[4], line_no));
    if (fields[5] != "0" && fields[5] != "1") throw ParseError("saturated must be 0 or 1", line_no);
    auto [it, inserted] = frame_slot.try_emplace(frame, rows.size());
    if (inserted) {
      frame_ids.push_back(frame);
      rows.emplace_back();
    }
    if (!rows[it->second].emplace(sensor, std::make_pair(b, fields[5] == "1")).second) {
      throw ParseError("duplicate (frame, sensor) row", line_no);
    }
  }
  if (rows.empty()) throw ParseError("reading stream has no rows", line_no);

  ReadingStream stream;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    ReadingSet set;
    std::size_t expected = 0;
    for (const auto& [sensor, value] : rows[k]) {
      if (sensor != expected++) {
        throw ParseError("frame " + std::to_string(frame_ids[k]) + " has non-contiguous sensor indices", 0);
      }
      set.readings.push_back(value.first);
      set.saturated.push_back(value.second);
    }
    if (!stream.frames.empty() && set.size() != stream.sensor_count()) {
      throw ParseError("frame " + std::to_string(frame_ids[k]) + " has a different sensor count", 0);
    }
    stream.frames.push_back(std::move(set));
    stream.sample_index.push_back(frame_ids[k]);
  }
  return stream;
}

void save_stream_csv(const ReadingStream& stream, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_stream_csv(out, stream);
}

ReadingStream load_stream_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_stream_csv(in);
}

}  // namespace maglocate
