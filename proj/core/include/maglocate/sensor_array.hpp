#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "maglocate/common.hpp"

namespace maglocate {

inline constexpr double kMinSensorSeparation = 1e-9;  // m

// Ordered, immutable set of 3-axis sensor positions. Index l in [0, N)
// identifies one sensor for the lifetime of the array.
class SensorArray {
 public:
  // Throws InvalidArgument on empty input, non-finite positions, or two
  // sensors closer than kMinSensorSeparation.
  SensorArray(std::vector<Vec3> positions, std::string name);

  std::size_t size() const noexcept { return positions_.size(); }
  const std::vector<Vec3>& positions() const noexcept { return positions_; }
  const Vec3& operator[](std::size_t i) const { return positions_[i]; }
  const std::string& name() const noexcept { return name_; }

  Vec3 centroid() const;
  Vec3 min_corner() const;
  Vec3 max_corner() const;

 private:
  std::vector<Vec3> positions_;
  std::string name_;
};

struct GridLayoutSpec {
  int rows = 1;            // along x
  int cols = 1;            // along y
  double pitch_x = 30e-3;  // m
  double pitch_y = 30e-3;  // m
  Vec3 origin = Vec3::Zero();  // x, y used; z comes from plane_z
  double plane_z = 0.0;
  bool centered = false;   // place the grid centroid at (origin.x, origin.y, plane_z)
};

// Row-major grid: sensor (i, j) sits at origin + (i * pitch_x, j * pitch_y)
// in the plane z = plane_z, shifted so the centroid lands on the origin when
// `centered` is set.
SensorArray make_grid(const GridLayoutSpec& spec);

enum class LayoutFamily { kTwoByN, kFourByM };

inline constexpr double kTwoByNPitch = 2e-3;
inline constexpr double kFourByMPitch = 30e-3;

struct ReferenceLayoutOptions {
  bool permissive = false;       // allow counts outside {3,4,6,8} / {2,3,4,5}
  Vec3 origin = Vec3::Zero();    // grid centroid
  double pitch_override = 0.0;   // > 0 replaces the family pitch
};

// 2 x n grid at 2 mm pitch or 4 x m grid at 30 mm pitch, centered on
// options.origin in the z = origin.z plane.
SensorArray reference_layout(LayoutFamily family, int count, const ReferenceLayoutOptions& options = {});

std::string to_string(LayoutFamily family);
LayoutFamily parse_layout_family(const std::string& text);

// Plain text: one sensor per line, "x y z" in meters, '#' starts a comment.
// A "# layout: <name>" header names the array.
SensorArray read_array(std::istream& in, const std::string& default_name);
SensorArray load_array(const std::filesystem::path& path);
void write_array(std::ostream& out, const SensorArray& array);
void save_array(const SensorArray& array, const std::filesystem::path& path);

}  // namespace maglocate
