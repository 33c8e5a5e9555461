#include "maglocate/sensor_array.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace maglocate {

SensorArray::SensorArray(std::vector<Vec3> positions, std::string name)
    : positions_(std::move(positions)), name_(std::move(name)) {
  if (positions_.empty()) {
    throw InvalidArgument("sensor array needs at least one sensor");
  }
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (!positions_[i].allFinite()) {
      throw InvalidArgument("sensor " + std::to_string(i) + " has a non-finite position");
    }
  }
  // O(N^2) is fine for arrays of tens of sensors.
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    for (std::size_t j = i + 1; j < positions_.size(); ++j) {
      if ((positions_[i] - positions_[j]).norm() < kMinSensorSeparation) {
        throw InvalidArgument("sensors " + std::to_string(i) + " and " + std::to_string(j) +
                              " share a position");
      }
    }
  }
}

Vec3 SensorArray::centroid() const {
  Vec3 sum = Vec3::Zero();
  for (const auto& p : positions_) sum += p;
  return sum / static_cast<double>(positions_.size());
}

Vec3 SensorArray::min_corner() const {
  Vec3 lo = positions_.front();
  for (const auto& p : positions_) lo = lo.cwiseMin(p);
  return lo;
}

Vec3 SensorArray::max_corner() const {
  Vec3 hi = positions_.front();
  for (const auto& p : positions_) hi = hi.cwiseMax(p);
  return hi;
}

SensorArray make_grid(const GridLayoutSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) {
    throw InvalidArgument("grid needs rows >= 1 and cols >= 1");
  }
  if (!(spec.pitch_x > 0.0) || !(spec.pitch_y > 0.0)) {
    throw InvalidArgument("grid pitches must be positive");
  }
  double x0 = spec.origin.x();
  double y0 = spec.origin.y();
  if (spec.centered) {
    x0 -= 0.5 * (spec.rows - 1) * spec.pitch_x;
    y0 -= 0.5 * (spec.cols - 1) * spec.pitch_y;
  }
  std::vector<Vec3> positions;
  positions.reserve(static_cast<std::size_t>(spec.rows) * static_cast<std::size_t>(spec.cols));
  for (int i = 0; i < spec.rows; ++i) {
    for (int j = 0; j < spec.cols; ++j) {
      positions.emplace_back(x0 + i * spec.pitch_x, y0 + j * spec.pitch_y, spec.plane_z);
    }
  }
  std::ostringstream name;
  name << "grid_" << spec.rows << "x" << spec.cols;
  return SensorArray(std::move(positions), name.str());
}

std::string to_string(LayoutFamily family) {
  switch (family) {
    case LayoutFamily::kTwoByN:
      return "two_by_n";
    case LayoutFamily::kFourByM:
      return "four_by_m";
  }
  return "unknown";
}

LayoutFamily parse_layout_family(const std::string& text) {
  if (text == "two_by_n" || text == "2xn") return LayoutFamily::kTwoByN;
  if (text == "four_by_m" || text == "4xm") return LayoutFamily::kFourByM;
  throw InvalidArgument("unknown layout family '" + text + "' (expected two_by_n or four_by_m)");
}

SensorArray reference_layout(LayoutFamily family, int count, const ReferenceLayoutOptions& options) {
  GridLayoutSpec grid;
  grid.cols = count;
  grid.origin = options.origin;
  grid.plane_z = options.origin.z();
  grid.centered = true;
  std::vector<int> allowed;
  if (family == LayoutFamily::kTwoByN) {
    grid.rows = 2;
    grid.pitch_x = grid.pitch_y = kTwoByNPitch;
    allowed = {3, 4, 6, 8};
  } else {
    grid.rows = 4;
    grid.pitch_x = grid.pitch_y = kFourByMPitch;
    allowed = {2, 3, 4, 5};
  }
  if (options.pitch_override > 0.0) {
    grid.pitch_x = grid.pitch_y = options.pitch_override;
  }
  if (count < 1) {
    throw InvalidArgument("layout count must be >= 1");
  }
  if (!options.permissive && std::find(allowed.begin(), allowed.end(), count) == allowed.end()) {
    throw InvalidArgument(to_string(family) + " does not support count " + std::to_string(count) +
                          " (pass permissive to allow it)");
  }
  SensorArray grid_array = make_grid(grid);
  std::ostringstream name;
  name << (family == LayoutFamily::kTwoByN ? "2x" : "4x") << count;
  return SensorArray(grid_array.positions(), name.str());
}

SensorArray read_array(std::istream& in, const std::string& default_name) {
  std::vector<Vec3> positions;
  std::string name = default_name;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      const std::string comment = line.substr(hash + 1);
      const auto key = comment.find("layout:");
      if (key != std::string::npos && positions.empty()) {
        std::istringstream cs(comment.substr(key + 7));
        std::string parsed;
        if (cs >> parsed) name = parsed;
      }
      line.erase(hash);
    }
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;  // blank or comment-only
    ls.clear();
    ls.seekg(0);
    double x = 0, y = 0, z = 0;
    if (!(ls >> x >> y >> z)) {
      throw ParseError("expected three coordinates 'x y z' in meters", line_no);
    }
    std::string extra;
    if (ls >> extra) {
      throw ParseError("unexpected trailing token '" + extra + "'", line_no);
    }
    const Vec3 p(x, y, z);
    if (!p.allFinite()) {
      throw ParseError("non-finite coordinate", line_no);
    }
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if ((positions[i] - p).norm() < kMinSensorSeparation) {
        throw ParseError("duplicate sensor position (same as sensor " + std::to_string(i + 1) + ")", line_no);
      }
    }
    positions.push_back(p);
  }
  if (positions.empty()) {
    throw ParseError("array file contains no sensors", 0);
  }
  return SensorArray(std::move(positions), name);
}

SensorArray load_array(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open array file " + path.string());
  }
  return read_array(in, path.stem().string());
}

void write_array(std::ostream& out, const SensorArray& array) {
  out << "# layout: " << array.name() << "\n";
  out << "# " << array.size() << " sensors, x y z in meters\n";
  out << std::setprecision(17);
  for (const auto& p : array.positions()) {
    out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
}

void save_array(const SensorArray& array, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write array file " + path.string());
  }
  write_array(out, array);
}

}  // namespace maglocate
