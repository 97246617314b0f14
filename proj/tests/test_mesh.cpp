// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "flexpaint/primitives.hpp"
#include "oracles.hpp"

namespace fp = flexpaint;
using fp::Vec2;
using fp::Vec3;

namespace {

fp::TriMesh single_triangle() {
  return fp::make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}, {{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}});
}

}  // namespace

TEST(MakeMesh, RejectsOutOfRangeIndex) {
  EXPECT_THROW(fp::make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 3}}, {{Vec2{}, Vec2{1, 0}, Vec2{0, 1}}}),
               fp::Error);
}

TEST(MakeMesh, RejectsUvOutsideUnitSquare) {
  EXPECT_THROW(fp::make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}, {{Vec2{}, Vec2{1.5, 0}, Vec2{0, 1}}}),
               fp::Error);
}

TEST(MakeMesh, MissingUvsIsAnError) {
  try {
    fp::make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}, {});
    FAIL();
  } catch (const fp::Error& e) {
    EXPECT_STREQ(e.what(), "mesh has no UV atlas");
  }
}

TEST(MakeMesh, DropsTrianglesDegenerateInBothDomains) {
  // second triangle collapses in 3D and UV, third only in 3D
  auto m = fp::make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 0, 0}, {0, 0, 1}},
                         {{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}},
                          {Vec2{0.5, 0.5}, Vec2{0.5, 0.5}, Vec2{0.5, 0.5}},
                          {Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}});
  EXPECT_EQ(m.triangle_count(), 2);
  EXPECT_EQ(m.dropped_degenerate, 1);
}

TEST(MakeMesh, ComputedNormalsAreUnit) {
  auto m = fp::make_icosphere(1);
  fp::TriMesh raw = fp::make_mesh(m.positions, m.triangles, m.uvs);
  for (const auto& n : raw.normals) EXPECT_NEAR(fp::length(n), 1.0, 1e-12);
  // outward on a sphere
  for (std::size_t i = 0; i < raw.positions.size(); ++i) EXPECT_GT(fp::dot(raw.normals[i], raw.positions[i]), 0.9);
}

TEST(MakeMesh, RejectsNonFinitePosition) {
  EXPECT_THROW(fp::make_mesh({{0, 0, 0}, {1, 0, 0}, {0, NAN, 0}}, {{0, 1, 2}}, {{Vec2{}, Vec2{1, 0}, Vec2{0, 1}}}),
               fp::Error);
}

TEST(NormalizeMesh, MapsCubeCornersToUnitBox) {
  auto cube = fp::make_cube(1.0);
  for (auto& p : cube.positions) p = p + Vec3{1, 1, 1};  // (0,0,0)-(2,2,2)
  const auto b = fp::mesh_bounds(fp::normalize_mesh(cube));
  EXPECT_EQ(b.min, (Vec3{-1, -1, -1}));
  EXPECT_EQ(b.max, (Vec3{1, 1, 1}));
}

TEST(NormalizeMesh, IsIdempotent) {
  auto m = fp::oracle::random_soup(30, 7);  // arbitrary box
  for (auto& p : m.positions) p = p * 3.7 + Vec3{0.3, -2, 5};
  const auto once = fp::normalize_mesh(m);
  const auto twice = fp::normalize_mesh(once);
  for (std::size_t i = 0; i < once.positions.size(); ++i) {
    EXPECT_NEAR(once.positions[i].x, twice.positions[i].x, 1e-7);
    EXPECT_NEAR(once.positions[i].y, twice.positions[i].y, 1e-7);
    EXPECT_NEAR(once.positions[i].z, twice.positions[i].z, 1e-7);
  }
  EXPECT_EQ(once.uvs, m.uvs);
}

TEST(NormalizeMesh, RejectsEmptyAndZeroExtent) {
  EXPECT_THROW(fp::normalize_mesh(fp::TriMesh{}), fp::Error);
  // coincident vertices survive validation only through UV area
  auto m = fp::make_mesh({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}, {{0, 1, 2}}, {{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}});
  ASSERT_EQ(m.triangle_count(), 1);
  EXPECT_THROW(fp::normalize_mesh(m), fp::Error);
}

TEST(SurroundRig, FourViewsAtEvenAzimuths) {
  fp::RigSpec spec;
  spec.distance = 2.0;
  const auto rig = fp::make_surround_rig(spec);
  ASSERT_EQ(rig.size(), 4);
  const Vec3 expected[4] = {{2, 0, 0}, {0, 0, 2}, {-2, 0, 0}, {0, 0, -2}};
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(rig[k].eye.x, expected[k].x, 1e-12);
    EXPECT_NEAR(rig[k].eye.y, expected[k].y, 1e-12);
    EXPECT_NEAR(rig[k].eye.z, expected[k].z, 1e-12);
    EXPECT_EQ(rig[k].target, (Vec3{0, 0, 0}));
  }
}

TEST(SurroundRig, SingleView) {
  fp::RigSpec spec;
  spec.view_count = 1;
  const auto rig = fp::make_surround_rig(spec);
  ASSERT_EQ(rig.size(), 1);
  EXPECT_NEAR(rig[0].eye.x, spec.distance, 1e-12);
}

TEST(SurroundRig, ElevatedEyesShareHeight) {
  fp::RigSpec spec;
  spec.elevation_deg = 20;
  spec.distance = 3;
  const auto rig = fp::make_surround_rig(spec);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(rig[k].eye.y, 3 * std::sin(20 * fp::kPi / 180), 1e-12);
    EXPECT_GT(rig[k].eye.y, 0);
    const double az = std::atan2(rig[k].eye.z, rig[k].eye.x);
    const double next = std::atan2(rig[(k + 1) % 4].eye.z, rig[(k + 1) % 4].eye.x);
    EXPECT_NEAR(std::remainder(next - az, 2 * fp::kPi), fp::kPi / 2, 1e-12);
  }
}

TEST(SurroundRig, ViewDirectionsCancel) {
  const auto rig = fp::make_surround_rig({});
  Vec3 sum;
  for (const auto& cam : rig.cameras) sum += cam.basis().forward;
  EXPECT_LT(fp::length(sum), 1e-6);
}

TEST(SurroundRig, RejectsBadSpecs) {
  fp::RigSpec s;
  s.distance = 0;
  EXPECT_THROW(fp::make_surround_rig(s), fp::Error);
  s = {};
  s.resolution = 0;
  EXPECT_THROW(fp::make_surround_rig(s), fp::Error);
  s = {};
  s.view_count = 0;
  EXPECT_THROW(fp::make_surround_rig(s), fp::Error);
}

TEST(Camera, DegenerateUpIsRejected) {
  fp::Camera cam;
  cam.eye = {0, 3, 0};
  cam.up = {0, 1, 0};
  EXPECT_THROW(fp::validate_camera(cam), fp::Error);
}

TEST(Camera, ProjectionInvertsPixelRay) {
  for (bool persp : {true, false}) {
    const auto cam = fp::oracle::random_camera(11, 4.0, 64, persp);
    const auto ray = cam.pixel_ray(17.25, 40.5);
    const auto sp = cam.project(ray.origin + ray.direction * 3.0);
    EXPECT_NEAR(sp.x, 17.25, 1e-9);
    EXPECT_NEAR(sp.y, 40.5, 1e-9);
  }
}

TEST(BakeAtlas, SingleTriangleCoversLowerLeftHalf) {
  const auto atlas = fp::bake_atlas_maps(single_triangle(), 8);
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) EXPECT_EQ(atlas.validity(i, j), i + j <= 7) << i << "," << j;
}

TEST(BakeAtlas, PositionIsBarycentricAverage) {
  const auto mesh = fp::make_mesh({{0, 0, 0}, {3, 0, 0}, {0, 3, 3}}, {{0, 1, 2}},
                                  {{Vec2{0, 0}, Vec2{0.75, 0}, Vec2{0, 0.75}}});
  // texel (1,1) of a 6x6 atlas samples uv (0.25, 0.25), the UV centroid
  const auto atlas = fp::bake_atlas_maps(mesh, 6);
  ASSERT_TRUE(atlas.validity(1, 1));
  const auto p = atlas.position_at(7);
  EXPECT_NEAR(p.x, 1.0, 1e-12);
  EXPECT_NEAR(p.y, 1.0, 1e-12);
  EXPECT_NEAR(p.z, 1.0, 1e-12);
}

TEST(BakeAtlas, CubeTexelsLieOnFaces) {
  const auto atlas = fp::bake_atlas_maps(fp::make_cube(), 64);
  ASSERT_GT(atlas.validity.count(), 0u);
  for (std::size_t t = 0; t < atlas.texel_count(); ++t) {
    if (!atlas.validity[t]) continue;
    const auto p = atlas.position_at(t);
    EXPECT_NEAR(std::max({std::abs(p.x), std::abs(p.y), std::abs(p.z)}), 1.0, 1e-5);
    EXPECT_NEAR(fp::length(atlas.normal_at(t)), 1.0, 1e-12);
    EXPECT_TRUE(atlas.bounds.contains(p, 1e-12));
  }
  EXPECT_EQ(atlas.contested_texels, 0);
}

TEST(BakeAtlas, ValidityMatchesPointInTriangleOracle) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto mesh = fp::oracle::random_soup(static_cast<int>(10 + 15 * seed), seed);
    for (int res : {16, 37}) {
      const auto atlas = fp::bake_atlas_maps(mesh, res);
      EXPECT_EQ(atlas.validity, fp::oracle::uv_coverage(mesh, res)) << "seed " << seed << " res " << res;
    }
  }
}

TEST(BakeAtlas, CountsContestedTexels) {
  // two identical UV triangles
  const auto mesh = fp::make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 1, 2}, {0, 1, 3}},
                                  {{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}, {Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}});
  const auto atlas = fp::bake_atlas_maps(mesh, 8);
  EXPECT_GT(atlas.contested_texels, 0);
  // last writer wins
  for (std::size_t t = 0; t < atlas.texel_count(); ++t)
    if (atlas.validity[t]) EXPECT_EQ(atlas.triangle[t], 1);
}

TEST(BakeAtlas, RejectsTinyResolution) { EXPECT_THROW(fp::bake_atlas_maps(single_triangle(), 3), fp::Error); }

TEST(Primitives, IcosphereHas320Faces) {
  const auto s = fp::make_icosphere();
  EXPECT_EQ(s.triangle_count(), 320);
  for (const auto& p : s.positions) EXPECT_NEAR(fp::length(p), 1.0, 1e-12);
  EXPECT_EQ(fp::bake_atlas_maps(s, 64).contested_texels, 0);
}

TEST(Primitives, CubeFacesPointOutward) {
  const auto c = fp::make_cube();
  EXPECT_EQ(c.triangle_count(), 12);
  for (int f = 0; f < 12; ++f) {
    const auto centroid = (c.corner(f, 0) + c.corner(f, 1) + c.corner(f, 2)) / 3.0;
    EXPECT_GT(fp::dot(c.face_normal(f), centroid), 0);
  }
}
