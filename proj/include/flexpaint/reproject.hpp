// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "flexpaint/raster.hpp"

namespace flexpaint {

struct ReprojectOptions {
  double depth_tolerance = 1e-2;  // relative
  double cos_cutoff = 0.087;      // ~85 degrees
  double edge_slope = 10.0;       // depth slope (tan of slant) mapped to depth_edge = 1
  int search_radius = 1;          // pixel neighborhood searched for the texel's own sample
};

/// View image lifted onto the atlas. Uncovered texels hold the sentinel
/// color and zero confidence channels.
struct PartialTexture {
  Image colors;       // 3 channels
  Mask covered;
  Image view_cos;     // clamped to [0,1]
  Image depth_edge;   // [0,1]
  int view_id = 0;

  int resolution() const { return colors.width(); }
  std::size_t texel_count() const { return colors.pixel_count(); }
};

/// Texel-to-pixel lookup for one camera; built once per (mesh, camera) and
/// reused for every image seen from that camera.
struct ViewProjection {
  int resolution = 0;
  int view_id = 0;
  int image_width = 0, image_height = 0;
  std::vector<int> pixel;  // linear pixel index per texel, -1 if not covered
  std::vector<double> view_cos;
  std::vector<double> depth_edge;
};

namespace detail {

inline double depth_edge_at(const RenderOutputs& render, const Camera& camera, int x, int y, double edge_slope) {
  const int W = render.width, H = render.height;
  auto z = [&](int xx, int yy) { return render.depth.data()[render.pixel(xx, yy)]; };
  if (x <= 0 || y <= 0 || x >= W - 1 || y >= H - 1) return 1.0;
  if (!render.coverage(x - 1, y) || !render.coverage(x + 1, y) || !render.coverage(x, y - 1) ||
      !render.coverage(x, y + 1))
    return 1.0;
  const double gx = 0.5 * (z(x + 1, y) - z(x - 1, y));
  const double gy = 0.5 * (z(x, y + 1) - z(x, y - 1));
  const double footprint = 2.0 * camera.half_height_at(z(x, y)) / H;
  const double slope = std::sqrt(gx * gx + gy * gy) / footprint;
  return std::min(1.0, slope / edge_slope);
}

}  // namespace detail

/// Gathers, for every valid atlas texel, the pixel that observes it. A texel
/// is covered when it projects inside the frame, passes the relative depth
/// test against the z-buffer, faces the camera beyond cos_cutoff, and some
/// pixel within search_radius of its projection samples exactly this texel.
/// The last rule makes reproject(rasterize(T)) reproduce T bit-exactly.
inline ViewProjection build_view_projection(const Camera& camera, const TriMesh& mesh, const UvAtlasMaps& atlas,
                                            const RenderOutputs& render, const ReprojectOptions& options = {},
                                            int view_id = 0) {
  require(atlas.triangle_count == mesh.triangle_count(), "atlas was not baked from this mesh (triangle counts differ)");
  require(render.width == camera.width && render.height == camera.height, "render does not match camera resolution");
  const int res = atlas.resolution;
  const int W = camera.width, H = camera.height;
  ViewProjection proj;
  proj.resolution = res;
  proj.view_id = view_id;
  proj.image_width = W;
  proj.image_height = H;
  proj.pixel.assign(atlas.texel_count(), -1);
  proj.view_cos.assign(atlas.texel_count(), 0.0);
  proj.depth_edge.assign(atlas.texel_count(), 0.0);
  const auto basis = camera.basis();

  parallel_for(0, res, [&](int j) {
    for (int i = 0; i < res; ++i) {
      const auto t = static_cast<std::size_t>(j) * res + i;
      if (!atlas.validity[t]) continue;
      const auto pos = atlas.position_at(t);
      const auto sp = camera.project(pos, basis);
      if (!(sp.depth > camera.near && sp.depth < camera.far)) continue;
      if (!(sp.x >= 0 && sp.x < W && sp.y >= 0 && sp.y < H)) continue;
      const int px = std::min(W - 1, static_cast<int>(sp.x)), py = std::min(H - 1, static_cast<int>(sp.y));
      const auto p = render.pixel(px, py);
      if (!render.coverage[p]) continue;
      if (std::abs(sp.depth - render.depth.data()[p]) > options.depth_tolerance * sp.depth) continue;
      const double vc = dot(atlas.normal_at(t), camera.to_viewer(pos));
      if (!(vc > options.cos_cutoff)) continue;

      int best = -1;
      double best_d2 = std::numeric_limits<double>::infinity();
      const int r = options.search_radius;
      for (int y = std::max(0, py - r); y <= std::min(H - 1, py + r); ++y)
        for (int x = std::max(0, px - r); x <= std::min(W - 1, px + r); ++x) {
          const auto q = render.pixel(x, y);
          if (!render.coverage[q]) continue;
          if (nearest_texel(render.uv.data()[2 * q], render.uv.data()[2 * q + 1], res) != t) continue;
          const double dx = x + 0.5 - sp.x, dy = y + 0.5 - sp.y, d2 = dx * dx + dy * dy;
          if (d2 < best_d2) best_d2 = d2, best = static_cast<int>(q);
        }
      if (best < 0) continue;
      proj.pixel[t] = best;
      proj.view_cos[t] = std::min(1.0, vc);
      proj.depth_edge[t] = detail::depth_edge_at(render, camera, px, py, options.edge_slope);
    }
  });
  return proj;
}

/// Lifts `image` (seen from the projection's camera) onto the atlas.
inline PartialTexture apply_projection(const ViewProjection& proj, const Image& image) {
  require(image.width() == proj.image_width && image.height() == proj.image_height,
          "image resolution does not match camera resolution");
  require(image.channels() == 3, "reprojection expects an RGB image");
  const int res = proj.resolution;
  PartialTexture out;
  out.colors = Image(res, res, 3);
  out.covered = Mask(res, res);
  out.view_cos = Image(res, res, 1);
  out.depth_edge = Image(res, res, 1);
  out.view_id = proj.view_id;
  for (std::size_t t = 0; t < proj.pixel.size(); ++t) {
    const int p = proj.pixel[t];
    for (int c = 0; c < 3; ++c) out.colors.data()[3 * t + c] = p < 0 ? kSentinelColor[c] : image.data()[3 * static_cast<std::size_t>(p) + c];
    if (p < 0) continue;
    out.covered.set(t, true);
    out.view_cos.data()[t] = proj.view_cos[t];
    out.depth_edge.data()[t] = proj.depth_edge[t];
  }
  return out;
}

inline PartialTexture reproject(const Image& image, const Camera& camera, const TriMesh& mesh, const UvAtlasMaps& atlas,
                                const ReprojectOptions& options = {}, int view_id = 0) {
  require(image.width() == camera.width && image.height() == camera.height,
          "image resolution does not match camera resolution");
  require(atlas.triangle_count == mesh.triangle_count(), "atlas was not baked from this mesh (triangle counts differ)");
  const auto render = rasterize(mesh, camera);
  return apply_projection(build_view_projection(camera, mesh, atlas, render, options, view_id), image);
}

inline std::vector<ViewProjection> build_rig_projections(const CameraRig& rig, const TriMesh& mesh,
                                                         const UvAtlasMaps& atlas,
                                                         const std::vector<RenderOutputs>& geometry,
                                                         const ReprojectOptions& options = {}) {
  require(static_cast<int>(geometry.size()) == rig.size(), "geometry renders do not match rig");
  std::vector<ViewProjection> out;
  for (int v = 0; v < rig.size(); ++v)
    out.push_back(build_view_projection(rig[v], mesh, atlas, geometry[v], options, v));
  return out;
}

inline std::vector<PartialTexture> reproject_grid(const GridImage& grid, const std::vector<ViewProjection>& projections) {
  require(grid.view_count() == static_cast<int>(projections.size()), "grid tile count does not match rig size");
  std::vector<PartialTexture> out;
  for (std::size_t v = 0; v < projections.size(); ++v) out.push_back(apply_projection(projections[v], grid.tiles[v]));
  return out;
}

inline std::vector<PartialTexture> reproject_grid(const GridImage& grid, const CameraRig& rig, const TriMesh& mesh,
                                                  const UvAtlasMaps& atlas, const ReprojectOptions& options = {}) {
  require(grid.view_count() == rig.size(), "grid tile count does not match rig size");
  return reproject_grid(grid, build_rig_projections(rig, mesh, atlas, render_geometry(mesh, rig), options));
}

}  // namespace flexpaint
