// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "flexpaint/grid.hpp"
#include "flexpaint/mesh.hpp"
#include "flexpaint/texture.hpp"

namespace flexpaint {

inline constexpr Color kBackgroundColor{1.0, 1.0, 1.0};

/// Per-pixel outputs of one rasterization pass. Background pixels hold
/// depth = +inf, triangle = -1, color = white and zeros elsewhere.
struct RenderOutputs {
  int width = 0, height = 0;
  Image depth;      // camera-space depth, 1 channel
  Image normal;     // interpolated shading normal, 3 channels
  Image uv;         // 2 channels
  Image view_cos;   // geometric normal vs. direction to eye, 1 channel
  Mask coverage;
  std::vector<int> triangle;
  Image color;      // 3 channels, only when shaded with a texture
  Mask texel_valid; // nearest texel lies in the texture's validity mask

  std::size_t pixel(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  bool has_color() const { return !color.empty(); }
};

struct RasterOptions {
  Sampling sampling = Sampling::nearest;
  bool cull_backfaces = true;
};

/// Samples `texture` at the interpolated UV of every covered pixel.
inline void shade(RenderOutputs& out, const TextureMap& texture, Sampling sampling) {
  validate_texture(texture);
  out.color = Image(out.width, out.height, 3);
  out.texel_valid = Mask(out.width, out.height);
  for (std::size_t p = 0; p < out.coverage.size(); ++p) {
    Color c = kBackgroundColor;
    if (out.coverage[p]) {
      bool valid = false;
      c = sample_texture(texture, out.uv.data()[2 * p], out.uv.data()[2 * p + 1], sampling, &valid);
      out.texel_valid.set(p, valid);
    }
    for (int k = 0; k < 3; ++k) out.color.data()[3 * p + k] = c[k];
  }
}

namespace detail {

struct ScreenTriangle {
  ScreenPoint v[3];
  double xmin, xmax, ymin, ymax;
  bool usable = false;
};

}  // namespace detail

/// Z-buffered rasterization with one sample per pixel center. Triangles with
/// a vertex at or behind the near plane are skipped (no clipping). Depth ties
/// keep the lower triangle index.
inline RenderOutputs rasterize(const TriMesh& mesh, const Camera& camera, const TextureMap* texture = nullptr,
                               RasterOptions options = {}) {
  validate_camera(camera);
  if (texture) validate_texture(*texture);
  const int W = camera.width, H = camera.height;
  constexpr double inf = std::numeric_limits<double>::infinity();

  RenderOutputs out;
  out.width = W;
  out.height = H;
  out.depth = Image(W, H, 1, inf);
  out.normal = Image(W, H, 3);
  out.uv = Image(W, H, 2);
  out.view_cos = Image(W, H, 1);
  out.coverage = Mask(W, H);
  out.triangle.assign(static_cast<std::size_t>(W) * H, -1);

  const auto basis = camera.basis();
  const bool perspective = camera.projection.kind == ProjectionKind::perspective;
  std::vector<detail::ScreenTriangle> screen(mesh.triangles.size());
  std::vector<Vec3> face_normals(mesh.triangles.size());
  for (int f = 0; f < mesh.triangle_count(); ++f) {
    auto& st = screen[f];
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      st.v[k] = camera.project(mesh.corner(f, k), basis);
      if (!(st.v[k].depth > camera.near)) ok = false;
    }
    face_normals[f] = mesh.face_normal(f);
    if (!ok || length_squared(face_normals[f]) == 0) continue;
    if (options.cull_backfaces) {
      const Vec3 toward = perspective ? camera.eye - mesh.corner(f, 0) : -basis.forward;
      if (!(dot(face_normals[f], toward) > 0)) continue;
    }
    st.xmin = std::min({st.v[0].x, st.v[1].x, st.v[2].x});
    st.xmax = std::max({st.v[0].x, st.v[1].x, st.v[2].x});
    st.ymin = std::min({st.v[0].y, st.v[1].y, st.v[2].y});
    st.ymax = std::max({st.v[0].y, st.v[1].y, st.v[2].y});
    st.usable = true;
  }

  parallel_for(0, H, [&](int y) {
    const double py = y + 0.5;
    for (int f = 0; f < mesh.triangle_count(); ++f) {
      const auto& st = screen[f];
      if (!st.usable || py < st.ymin || py > st.ymax) continue;
      const int x0 = std::max(0, static_cast<int>(std::ceil(st.xmin - 0.5)));
      const int x1 = std::min(W - 1, static_cast<int>(std::floor(st.xmax - 0.5)));
      const auto& tri = mesh.triangles[f];
      for (int x = x0; x <= x1; ++x) {
        std::array<double, 3> b;
        if (!barycentric_2d({st.v[0].x, st.v[0].y}, {st.v[1].x, st.v[1].y}, {st.v[2].x, st.v[2].y},
                            {x + 0.5, py}, b))
          continue;
        if (b[0] < 0 || b[1] < 0 || b[2] < 0) continue;
        double z;
        if (perspective) {
          double w[3], sum = 0;
          for (int k = 0; k < 3; ++k) sum += (w[k] = b[k] / st.v[k].depth);
          z = 1.0 / sum;
          for (int k = 0; k < 3; ++k) b[k] = w[k] * z;
        } else {
          z = b[0] * st.v[0].depth + b[1] * st.v[1].depth + b[2] * st.v[2].depth;
        }
        const auto p = out.pixel(x, y);
        if (!(z > camera.near && z < camera.far) || !(z < out.depth.data()[p])) continue;
        const auto pos = mesh.positions[tri[0]] * b[0] + mesh.positions[tri[1]] * b[1] + mesh.positions[tri[2]] * b[2];
        const double vc = dot(face_normals[f], camera.to_viewer(pos));
        if (options.cull_backfaces && !(vc > 0)) continue;
        auto n = normalize(mesh.normals[tri[0]] * b[0] + mesh.normals[tri[1]] * b[1] + mesh.normals[tri[2]] * b[2]);
        if (length_squared(n) == 0) n = face_normals[f];
        const auto& uv = mesh.uvs[f];
        out.depth.data()[p] = z;
        out.triangle[p] = f;
        out.coverage.set(p, true);
        out.view_cos.data()[p] = std::clamp(vc, -1.0, 1.0);
        for (int k = 0; k < 3; ++k) out.normal.data()[3 * p + k] = n[k];
        out.uv.data()[2 * p] = uv[0].x * b[0] + uv[1].x * b[1] + uv[2].x * b[2];
        out.uv.data()[2 * p + 1] = uv[0].y * b[0] + uv[1].y * b[1] + uv[2].y * b[2];
      }
    }
  });

  if (texture) shade(out, *texture, options.sampling);
  return out;
}

/// Geometry-only renders for every camera of a rig.
inline std::vector<RenderOutputs> render_geometry(const TriMesh& mesh, const CameraRig& rig) {
  std::vector<RenderOutputs> renders;
  renders.reserve(rig.size());
  for (const auto& cam : rig.cameras) renders.push_back(rasterize(mesh, cam));
  return renders;
}

/// Inverse-depth conditioning grid: foreground 1/z scaled so the largest
/// foreground value over all views is 1; background 0.
inline GridImage render_depth_grid(const TriMesh& mesh, const CameraRig& rig, GridLayout layout = {2, 2}) {
  require(rig.size() == layout.capacity(), "rig view count does not match grid capacity");
  GridImage grid;
  grid.layout = layout;
  double max_inv = 0;
  std::vector<RenderOutputs> renders = render_geometry(mesh, rig);
  for (const auto& r : renders)
    for (std::size_t p = 0; p < r.coverage.size(); ++p)
      if (r.coverage[p]) max_inv = std::max(max_inv, 1.0 / r.depth.data()[p]);
  for (const auto& r : renders) {
    Image tile(r.width, r.height, 1);
    for (std::size_t p = 0; p < r.coverage.size(); ++p)
      if (r.coverage[p]) tile.data()[p] = (1.0 / r.depth.data()[p]) / max_inv;
    grid.tiles.push_back(std::move(tile));
  }
  return grid;
}

/// Color renders of a texture from every rig camera, as a grid.
inline GridImage render_views(const TextureMap& texture, const std::vector<RenderOutputs>& geometry,
                              GridLayout layout, Sampling sampling = Sampling::nearest) {
  require(static_cast<int>(geometry.size()) == layout.capacity(), "rig view count does not match grid capacity");
  GridImage grid;
  grid.layout = layout;
  for (auto r : geometry) {
    shade(r, texture, sampling);
    grid.tiles.push_back(std::move(r.color));
  }
  return grid;
}

inline GridImage render_views(const TextureMap& texture, const TriMesh& mesh, const CameraRig& rig,
                              GridLayout layout = {2, 2}, Sampling sampling = Sampling::nearest) {
  require(rig.size() == layout.capacity(), "rig view count does not match grid capacity");
  return render_views(texture, render_geometry(mesh, rig), layout, sampling);
}

}  // namespace flexpaint
