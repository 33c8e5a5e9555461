#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "maglocate/sensor_array.hpp"

namespace maglocate {
namespace {

TEST(Grid, SingleSensor) {
  GridLayoutSpec g;
  g.pitch_x = 0.123;
  g.origin = Vec3(0.01, 0.02, 0.0);
  const SensorArray a = make_grid(g);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0], Vec3(0.01, 0.02, 0.0));
}

TEST(Grid, FourByFiveSpan) {
  GridLayoutSpec g;
  g.rows = 4;
  g.cols = 5;
  g.pitch_x = g.pitch_y = 30e-3;
  const SensorArray a = make_grid(g);
  ASSERT_EQ(a.size(), 20u);
  const Vec3 span = a.max_corner() - a.min_corner();
  EXPECT_NEAR(span.x(), 90e-3, 1e-15);
  EXPECT_NEAR(span.y(), 120e-3, 1e-15);
  EXPECT_EQ(span.z(), 0.0);
}

TEST(Grid, TwoByEightSpan) {
  GridLayoutSpec g;
  g.rows = 2;
  g.cols = 8;
  g.pitch_x = g.pitch_y = 2e-3;
  const SensorArray a = make_grid(g);
  ASSERT_EQ(a.size(), 16u);
  const Vec3 span = a.max_corner() - a.min_corner();
  EXPECT_NEAR(span.x(), 2e-3, 1e-15);
  EXPECT_NEAR(span.y(), 14e-3, 1e-15);
}

TEST(Grid, RowMajorOrder) {
  GridLayoutSpec g;
  g.rows = 2;
  g.cols = 3;
  g.pitch_x = 1.0;
  g.pitch_y = 10.0;
  const SensorArray a = make_grid(g);
  EXPECT_EQ(a[1], Vec3(0, 10, 0));
  EXPECT_EQ(a[3], Vec3(1, 0, 0));
}

TEST(Grid, CenteredGridCentroidAtOrigin) {
  for (int rows = 1; rows <= 5; ++rows) {
    for (int cols = 1; cols <= 6; ++cols) {
      GridLayoutSpec g;
      g.rows = rows;
      g.cols = cols;
      g.pitch_x = 0.017;
      g.pitch_y = 0.031;
      g.origin = Vec3(0.3, -0.2, 0.0);
      g.plane_z = 0.05;
      g.centered = true;
      const Vec3 c = make_grid(g).centroid();
      EXPECT_LT((c - Vec3(0.3, -0.2, 0.05)).norm(), 1e-12);
    }
  }
}

TEST(Grid, RejectsBadShape) {
  GridLayoutSpec g;
  g.rows = 0;
  EXPECT_THROW(make_grid(g), InvalidArgument);
  g.rows = 2;
  g.pitch_x = 0;
  EXPECT_THROW(make_grid(g), InvalidArgument);
}

TEST(ReferenceLayout, Counts) {
  EXPECT_EQ(reference_layout(LayoutFamily::kFourByM, 5).size(), 20u);
  EXPECT_EQ(reference_layout(LayoutFamily::kTwoByN, 3).size(), 6u);
  for (int n : {3, 4, 6, 8}) EXPECT_EQ(reference_layout(LayoutFamily::kTwoByN, n).size(), 2u * n);
  for (int m : {2, 3, 4, 5}) EXPECT_EQ(reference_layout(LayoutFamily::kFourByM, m).size(), 4u * m);
}

TEST(ReferenceLayout, PermissiveExtension) {
  EXPECT_THROW(reference_layout(LayoutFamily::kTwoByN, 1), InvalidArgument);
  ReferenceLayoutOptions opts;
  opts.permissive = true;
  EXPECT_EQ(reference_layout(LayoutFamily::kTwoByN, 1, opts).size(), 2u);
  EXPECT_THROW(reference_layout(LayoutFamily::kTwoByN, 0, opts), InvalidArgument);
}

TEST(ReferenceLayout, PitchAndCentering) {
  ReferenceLayoutOptions opts;
  opts.origin = Vec3(0.01, 0.02, 0.005);
  const SensorArray a = reference_layout(LayoutFamily::kTwoByN, 8, opts);
  EXPECT_LT((a.centroid() - opts.origin).norm(), 1e-12);
  EXPECT_NEAR((a[1] - a[0]).norm(), kTwoByNPitch, 1e-15);
  opts.pitch_override = 10e-3;
  const SensorArray b = reference_layout(LayoutFamily::kTwoByN, 8, opts);
  EXPECT_NEAR((b[1] - b[0]).norm(), 10e-3, 1e-15);
}

TEST(ReferenceLayout, FamilyNames) {
  EXPECT_EQ(parse_layout_family(to_string(LayoutFamily::kTwoByN)), LayoutFamily::kTwoByN);
  EXPECT_EQ(parse_layout_family(to_string(LayoutFamily::kFourByM)), LayoutFamily::kFourByM);
  EXPECT_THROW(parse_layout_family("three_by_k"), InvalidArgument);
}

TEST(SensorArrayTest, RejectsInvalidPositions) {
  EXPECT_THROW(SensorArray({}, "empty"), InvalidArgument);
  EXPECT_THROW(SensorArray({Vec3::Zero(), Vec3::Zero()}, "dup"), InvalidArgument);
  EXPECT_THROW(SensorArray({Vec3(std::nan(""), 0, 0)}, "nan"), InvalidArgument);
}

TEST(ArrayFile, SingleLine) {
  std::istringstream in("0 0 0\n");
  const SensorArray a = read_array(in, "one");
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0], Vec3::Zero());
}

TEST(ArrayFile, CommentsAndLayoutHeader) {
  std::istringstream in("# layout: bench\n\n  0.1 0.2 0.3  # first\n# trailing note\n0.4 0.5 0.6\n");
  const SensorArray a = read_array(in, "fallback");
  EXPECT_EQ(a.name(), "bench");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[1], Vec3(0.4, 0.5, 0.6));
}

TEST(ArrayFile, MalformedLineNamesLine) {
  std::istringstream in("0 0\n");
  try {
    read_array(in, "bad");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(ArrayFile, OtherParseErrors) {
  std::istringstream trailing("0 0 0 4\n");
  EXPECT_THROW(read_array(trailing, "x"), ParseError);
  std::istringstream dup("0 0 0\n1 1 1\n0 0 0\n");
  try {
    read_array(dup, "x");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream none("# nothing\n");
  EXPECT_THROW(read_array(none, "x"), ParseError);
}

TEST(ArrayFile, SaveLoadRoundTrip) {
  GridLayoutSpec g;
  g.rows = 4;
  g.cols = 5;
  g.pitch_x = 0.0301;
  g.pitch_y = 0.0299;
  g.origin = Vec3(0.0123, -0.0456, 0);
  g.plane_z = 0.0011;
  g.centered = true;
  const SensorArray a = make_grid(g);
  const auto path = std::filesystem::temp_directory_path() / "maglocate_array_roundtrip.txt";
  save_array(a, path);
  const SensorArray b = load_array(path);
  std::filesystem::remove(path);
  EXPECT_EQ(b.name(), a.name());
  ASSERT_EQ(b.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT((a[i] - b[i]).norm(), 1e-12);
}

TEST(ArrayFile, MissingFile) {
  EXPECT_THROW(load_array("/nonexistent/array.txt"), Error);
}

}  // namespace
}  // namespace maglocate
