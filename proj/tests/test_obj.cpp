// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "flexpaint/obj_io.hpp"
#include "flexpaint/primitives.hpp"

namespace fp = flexpaint;

namespace {

fp::TriMesh parse(const std::string& text) {
  std::istringstream in(text);
  return fp::parse_obj(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const fp::Error& e) {
    return e.what();
  }
  return {};
}

const char* kQuad =
    "# quad\n"
    "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
    "vt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\n"
    "f 1/1 2/2 3/3 4/4\n";

}  // namespace

TEST(ParseObj, QuadIsFanTriangulated) {
  const auto m = parse(kQuad);
  EXPECT_EQ(m.positions.size(), 4u);
  ASSERT_EQ(m.triangle_count(), 2);
  EXPECT_EQ(m.triangles[0], (fp::Triangle{0, 1, 2}));
  EXPECT_EQ(m.triangles[1], (fp::Triangle{0, 2, 3}));
  EXPECT_EQ(m.uvs[1][2], (fp::Vec2{0, 1}));
}

TEST(ParseObj, ZeroIndexNamesTheLine) {
  const auto err = error_of("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\n\nf 0/1 1/1 2/1\n");
  EXPECT_NE(err.find("line 6"), std::string::npos) << err;
  EXPECT_NE(err.find("index 0"), std::string::npos) << err;
}

TEST(ParseObj, OutOfRangeIndex) {
  const auto err = error_of("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 9/1\n");
  EXPECT_NE(err.find("line 5"), std::string::npos) << err;
  EXPECT_NE(err.find("out of range"), std::string::npos) << err;
}

TEST(ParseObj, NegativeIndicesCountFromEnd) {
  const auto m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf -3/-3 -2/-2 -1/-1\n");
  ASSERT_EQ(m.triangle_count(), 1);
  EXPECT_EQ(m.triangles[0], (fp::Triangle{0, 1, 2}));
  EXPECT_EQ(m.uvs[0][1], (fp::Vec2{1, 0}));
}

TEST(ParseObj, MissingUvs) {
  EXPECT_EQ(error_of("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"), "mesh has no UV atlas");
  // some faces with, some without
  EXPECT_EQ(error_of("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 3/1\nf 1 2 3\n"), "mesh has no UV atlas");
}

TEST(ParseObj, UvOutsideUnitSquareIsRejected) {
  const auto err = error_of("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1.25 0\nf 1/1 2/2 3/1\n");
  EXPECT_NE(err.find("line 6"), std::string::npos) << err;
}

TEST(ParseObj, MalformedRecords) {
  EXPECT_NE(error_of("v 0 0\n").find("line 1"), std::string::npos);
  EXPECT_NE(error_of("v 0 0 0\nv 1 0 0\nvt 0 0\nf 1/1 2/1\n").find("fewer than 3"), std::string::npos);
  EXPECT_NE(error_of("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1 2/x 3/1\n").find("malformed"), std::string::npos);
}

TEST(ParseObj, NormalsAreAveragedAndNormalized) {
  const auto m = parse(
      "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nvn 0 0 2\nvn 0 1 0\n"
      "f 1/1/1 2/2/1 3/3/2\n");
  EXPECT_NEAR(m.normals[0].z, 1.0, 1e-15);
  EXPECT_NEAR(m.normals[2].y, 1.0, 1e-15);
}

TEST(ParseObj, IgnoresCommentsAndUnknownRecords) {
  const auto m = parse(std::string("o thing\ng group\ns off\nusemtl x\n") + kQuad + "# trailing\n");
  EXPECT_EQ(m.triangle_count(), 2);
}

TEST(ObjRoundTrip, CubeSurvivesWriterAndLoader) {
  const auto cube = fp::make_cube();
  const auto path = (std::filesystem::temp_directory_path() / "flexpaint_cube_roundtrip.obj").string();
  fp::save_obj(cube, path);
  const auto back = fp::load_obj(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.triangle_count(), 12);
  EXPECT_EQ(back.triangles, cube.triangles);
  EXPECT_EQ(back.positions, cube.positions);
  EXPECT_EQ(back.uvs, cube.uvs);
  for (const auto& c : back.uvs)
    for (const auto& uv : c) {
      EXPECT_GE(uv.x, 0);
      EXPECT_LE(uv.x, 1);
      EXPECT_GE(uv.y, 0);
      EXPECT_LE(uv.y, 1);
    }
}

TEST(LoadObj, MissingFileAndPathInErrors) {
  EXPECT_THROW(fp::load_obj("/nonexistent/mesh.obj"), fp::Error);
  const auto path = (std::filesystem::temp_directory_path() / "flexpaint_bad.obj").string();
  {
    std::ofstream out(path);
    out << "v 0 0 0\nf 1 1 1\n";
  }
  try {
    fp::load_obj(path);
    FAIL();
  } catch (const fp::Error& e) {
    EXPECT_NE(std::string(e.what()).find(path), std::string::npos);
  }
  std::filesystem::remove(path);
}
