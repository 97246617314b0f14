// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Shared scenes and synthetic datasets for the unit and acceptance tests.

#include <random>

#include "flexpaint/fusion.hpp"
#include "flexpaint/primitives.hpp"

namespace flexpaint::fixture {

/// Mesh, four-view rig, atlas and the per-view geometry built from them.
struct Scene {
  TriMesh mesh;
  CameraRig rig;
  UvAtlasMaps atlas;
  std::vector<RenderOutputs> geometry;
  std::vector<ViewProjection> projections;
  GridLayout layout{2, 2};

  Scene(TriMesh m, int texture_res, int view_res, double elevation = 20.0)
      : mesh(std::move(m)) {
    RigSpec spec;
    spec.resolution = view_res;
    spec.elevation_deg = elevation;
    rig = make_surround_rig(spec);
    atlas = bake_atlas_maps(mesh, texture_res);
    geometry = render_geometry(mesh, rig);
    projections = build_rig_projections(rig, mesh, atlas, geometry);
  }
};

/// Smooth seeded color field evaluated at surface positions, so texels that
/// meet across a seam agree.
inline TextureMap smooth_texture(const UvAtlasMaps& atlas, std::uint64_t seed, double frequency = 2.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::array<Vec3, 3> dir;
  std::array<double, 3> phase;
  for (int c = 0; c < 3; ++c) {
    dir[c] = normalize(Vec3{u(rng), u(rng), u(rng)});
    phase[c] = 3.0 * u(rng);
  }
  TextureMap tex(atlas.resolution);
  for (std::size_t t = 0; t < atlas.texel_count(); ++t) {
    if (!atlas.validity[t]) continue;
    const Vec3 p = atlas.position_at(t);
    Color c;
    for (int k = 0; k < 3; ++k) c[k] = 0.5 + 0.35 * std::sin(frequency * dot(dir[k], p) + phase[k]);
    tex.set_color(t, c);
    tex.validity.set(t, true);
  }
  return tex;
}

/// Clean reprojections of the ground truth's renders, then view
/// `corrupt_view` gets per-texel gaussian error scaled by its depth_edge
/// channel and `amplitude`, on texels some other view also covers (no
/// weighting can repair a texel only one view sees). Every view also gets
/// mild uniform noise. With `scramble_edges` the corrupted view's depth_edge
/// channel is first replaced by uniform noise, which decouples it from the
/// view cosine.
inline WeighterSample edge_corrupted_sample(const Scene& scene, std::uint64_t seed, int corrupt_view = 0,
                                           double amplitude = 1.0, double base_noise = 0.02,
                                           bool scramble_edges = false) {
  WeighterSample s;
  s.ground_truth = smooth_texture(scene.atlas, seed);
  s.partials = reproject_grid(render_views(s.ground_truth, scene.geometry, scene.layout), scene.projections);
  std::mt19937_64 rng(seed * 0x2545F4914F6CDD1Dull + 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> t_dist(0.1, 0.9);
  s.t = t_dist(rng);
  if (scramble_edges) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto& p = s.partials[corrupt_view];
    for (std::size_t t = 0; t < p.texel_count(); ++t)
      if (p.covered[t]) p.depth_edge.data()[t] = unit(rng);
  }
  const int V = static_cast<int>(s.partials.size());
  for (int v = 0; v < V; ++v) {
    auto& p = s.partials[v];
    for (std::size_t t = 0; t < p.texel_count(); ++t) {
      if (!p.covered[t]) continue;
      int seen = 0;
      for (const auto& q : s.partials) seen += q.covered[t];
      const double scale = v == corrupt_view && seen >= 2 ? amplitude * p.depth_edge.data()[t] : 0.0;
      for (int c = 0; c < 3; ++c) p.colors.data()[3 * t + c] += scale * normal(rng) + base_noise * normal(rng);
    }
  }
  return s;
}

}  // namespace flexpaint::fixture
