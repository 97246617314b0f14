// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "flexpaint/core.hpp"

namespace flexpaint {

// -----------------------------------------------------------------------------
// Triangle mesh
// -----------------------------------------------------------------------------

using Triangle = std::array<int, 3>;
using CornerUvs = std::array<Vec2, 3>;

/// Indexed triangle mesh with per-corner UVs and per-vertex unit normals.
/// Instances produced by make_mesh() always satisfy the validation rules:
/// indices in range, UVs inside [0,1]^2, normals unit length.
struct TriMesh {
  std::vector<Vec3> positions;
  std::vector<Triangle> triangles;
  std::vector<CornerUvs> uvs;  // one entry per triangle
  std::vector<Vec3> normals;   // one entry per position
  int dropped_degenerate = 0;

  bool empty() const { return triangles.empty(); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }

  Vec3 corner(int tri, int k) const { return positions[triangles[tri][k]]; }
  Vec3 face_normal(int tri) const {
    return normalize(cross(corner(tri, 1) - corner(tri, 0), corner(tri, 2) - corner(tri, 0)));
  }
};

struct Bounds {
  Vec3 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  Vec3 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};

  void extend(Vec3 p) {
    min = component_min(min, p);
    max = component_max(max, p);
  }
  Vec3 center() const { return (min + max) * 0.5; }
  Vec3 extent() const { return max - min; }
  bool contains(Vec3 p, double eps = 0) const {
    return p.x >= min.x - eps && p.y >= min.y - eps && p.z >= min.z - eps &&
           p.x <= max.x + eps && p.y <= max.y + eps && p.z <= max.z + eps;
  }
};

inline Bounds mesh_bounds(const TriMesh& mesh) {
  Bounds b;
  for (const auto& tri : mesh.triangles)
    for (int k = 0; k < 3; ++k) b.extend(mesh.positions[tri[k]]);
  return b;
}

inline std::vector<Vec3> compute_vertex_normals(const std::vector<Vec3>& positions,
                                                const std::vector<Triangle>& triangles) {
  std::vector<Vec3> normals(positions.size());
  for (const auto& t : triangles) {
    // area-weighted
    auto n = cross(positions[t[1]] - positions[t[0]], positions[t[2]] - positions[t[0]]);
    for (int k = 0; k < 3; ++k) normals[t[k]] += n;
  }
  for (auto& n : normals) {
    n = normalize(n);
    if (length_squared(n) == 0) n = {0, 1, 0};
  }
  return normals;
}

/// Validates raw mesh arrays and returns a TriMesh. Triangles that have zero
/// area both in 3D and in UV space are dropped and counted. Empty `normals`
/// means "compute from faces".
inline TriMesh make_mesh(std::vector<Vec3> positions, const std::vector<Triangle>& triangles,
                         const std::vector<CornerUvs>& uvs, std::vector<Vec3> normals = {}) {
  require(uvs.size() == triangles.size(), "mesh has no UV atlas");
  require(normals.empty() || normals.size() == positions.size(),
          "normal count does not match position count");
  const auto n = static_cast<int>(positions.size());

  TriMesh mesh;
  for (std::size_t f = 0; f < triangles.size(); ++f) {
    const auto& t = triangles[f];
    for (int k = 0; k < 3; ++k) {
      require(t[k] >= 0 && t[k] < n, "triangle " + std::to_string(f) + " index out of range");
      const auto uv = uvs[f][k];
      require(uv.x >= 0 && uv.x <= 1 && uv.y >= 0 && uv.y <= 1,
              "triangle " + std::to_string(f) + " has UV outside [0,1]");
    }
    const auto area3 = length(cross(positions[t[1]] - positions[t[0]], positions[t[2]] - positions[t[0]]));
    const auto e1 = uvs[f][1] - uvs[f][0], e2 = uvs[f][2] - uvs[f][0];
    const auto area_uv = std::abs(e1.x * e2.y - e1.y * e2.x);
    if (area3 <= 1e-15 && area_uv <= 1e-15) {
      ++mesh.dropped_degenerate;
      continue;
    }
    mesh.triangles.push_back(t);
    mesh.uvs.push_back(uvs[f]);
  }
  for (const auto& p : positions)
    require(std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z), "non-finite vertex position");

  if (normals.empty()) {
    normals = compute_vertex_normals(positions, mesh.triangles);
  } else {
    for (auto& nrm : normals) {
      nrm = normalize(nrm);
      if (length_squared(nrm) == 0) nrm = {0, 1, 0};
    }
  }
  mesh.positions = std::move(positions);
  mesh.normals = std::move(normals);
  return mesh;
}

/// Translates the bounding-box center to the origin and scales the largest
/// half-extent to 1. UVs are untouched.
inline TriMesh normalize_mesh(const TriMesh& mesh) {
  require(!mesh.empty(), "cannot normalize an empty mesh");
  const auto bounds = mesh_bounds(mesh);
  const auto ext = bounds.extent();
  const double half = 0.5 * std::max({ext.x, ext.y, ext.z});
  require(half > 0, "cannot normalize a mesh with zero extent");
  const auto center = bounds.center();
  TriMesh out = mesh;
  for (auto& p : out.positions) p = (p - center) / half;
  return out;
}

// -----------------------------------------------------------------------------
// Cameras
// -----------------------------------------------------------------------------

enum class ProjectionKind { perspective, orthographic };

struct ProjectionSpec {
  ProjectionKind kind = ProjectionKind::perspective;
  double fov_deg = 40.0;       // vertical, perspective only
  double half_height = 1.2;    // object units, orthographic only
};

struct CameraBasis {
  Vec3 right, up, forward;
};

/// Continuous pixel coordinates (x right, y down, pixel centers at +0.5)
/// and camera-space depth along the view axis.
struct ScreenPoint {
  double x = 0, y = 0, depth = 0;
};

struct Ray {
  Vec3 origin, direction;  // direction is unit length
};

struct Camera {
  Vec3 eye{0, 0, 2};
  Vec3 target{0, 0, 0};
  Vec3 up{0, 1, 0};
  ProjectionSpec projection;
  int width = 256, height = 256;
  double near = 0.05, far = 100.0;

  CameraBasis basis() const {
    const auto f = normalize(target - eye);
    const auto r = normalize(cross(f, up));
    return {r, cross(r, f), f};
  }

  double aspect() const { return static_cast<double>(width) / height; }
  double half_height_at(double depth) const {
    return projection.kind == ProjectionKind::perspective
               ? depth * std::tan(radians(projection.fov_deg) * 0.5)
               : projection.half_height;
  }

  ScreenPoint project(Vec3 p) const { return project(p, basis()); }
  ScreenPoint project(Vec3 p, const CameraBasis& b) const {
    const auto d = p - eye;
    const double depth = dot(d, b.forward);
    const double hh = half_height_at(depth);
    const double ndc_x = dot(d, b.right) / (hh * aspect());
    const double ndc_y = dot(d, b.up) / hh;
    return {(ndc_x + 1) * 0.5 * width, (1 - ndc_y) * 0.5 * height, depth};
  }

  /// Ray through continuous pixel coordinates (px, py).
  Ray pixel_ray(double px, double py) const {
    const auto b = basis();
    const double ndc_x = px / width * 2 - 1;
    const double ndc_y = 1 - py / height * 2;
    if (projection.kind == ProjectionKind::perspective) {
      const double t = std::tan(radians(projection.fov_deg) * 0.5);
      return {eye, normalize(b.forward + b.right * (ndc_x * t * aspect()) + b.up * (ndc_y * t))};
    }
    const double hh = projection.half_height;
    return {eye + b.right * (ndc_x * hh * aspect()) + b.up * (ndc_y * hh), b.forward};
  }

  /// Unit direction from a surface point toward the viewer.
  Vec3 to_viewer(Vec3 p) const {
    return projection.kind == ProjectionKind::perspective ? normalize(eye - p) : -basis().forward;
  }
};

inline void validate_camera(const Camera& cam) {
  require(cam.width > 0 && cam.height > 0, "camera resolution must be positive");
  require(cam.near > 0 && cam.near < cam.far, "camera requires 0 < near < far");
  const auto b = cam.basis();
  const double err = std::max({std::abs(dot(b.right, b.up)), std::abs(dot(b.right, b.forward)),
                               std::abs(dot(b.up, b.forward)), std::abs(length(b.right) - 1),
                               std::abs(length(b.up) - 1), std::abs(length(b.forward) - 1)});
  require(err <= 1e-6, "camera basis is not orthonormal (eye, target and up are degenerate)");
  if (cam.projection.kind == ProjectionKind::perspective)
    require(cam.projection.fov_deg > 0 && cam.projection.fov_deg < 180, "field of view out of range");
  else
    require(cam.projection.half_height > 0, "orthographic half-height must be positive");
}

struct RigSpec {
  int view_count = 4;
  double elevation_deg = 0.0;
  double distance = 5.2;
  int resolution = 512;
  ProjectionSpec projection;
  double near = 0.05;
  double far = 100.0;
};

/// Evenly spaced surround cameras looking at the origin.
struct CameraRig {
  std::vector<Camera> cameras;
  RigSpec spec;

  int size() const { return static_cast<int>(cameras.size()); }
  const Camera& operator[](int i) const { return cameras[i]; }
};

/// Camera k sits at azimuth k*360/V measured from +x toward +z, with y up.
inline CameraRig make_surround_rig(const RigSpec& spec) {
  require(spec.view_count >= 1, "view count must be at least 1");
  require(spec.distance > 0, "rig distance must be positive");
  require(spec.resolution > 0, "rig resolution must be positive");
  require(std::abs(spec.elevation_deg) < 90, "rig elevation must be inside (-90, 90) degrees");
  CameraRig rig;
  rig.spec = spec;
  const double el = radians(spec.elevation_deg);
  for (int k = 0; k < spec.view_count; ++k) {
    const double az = 2 * kPi * k / spec.view_count;
    Camera cam;
    cam.eye = Vec3{std::cos(el) * std::cos(az), std::sin(el), std::cos(el) * std::sin(az)} * spec.distance;
    cam.target = {0, 0, 0};
    cam.up = {0, 1, 0};
    cam.projection = spec.projection;
    cam.width = cam.height = spec.resolution;
    cam.near = spec.near;
    cam.far = spec.far;
    validate_camera(cam);
    rig.cameras.push_back(cam);
  }
  return rig;
}

// -----------------------------------------------------------------------------
// UV atlas maps
// -----------------------------------------------------------------------------

/// UV-space bakes of surface position and normal. Invalid texels hold zeros
/// and must not be read.
struct UvAtlasMaps {
  int resolution = 0;
  Image position;   // 3 channels
  Image normal;     // 3 channels
  Mask validity;
  std::vector<int> triangle;  // covering triangle per texel, -1 if invalid
  int triangle_count = 0;
  int contested_texels = 0;   // texels claimed by more than one UV triangle interior
  Bounds bounds;

  std::size_t texel_count() const { return static_cast<std::size_t>(resolution) * resolution; }
  Vec3 position_at(std::size_t i) const {
    const auto& d = position.data();
    return {d[3 * i], d[3 * i + 1], d[3 * i + 2]};
  }
  Vec3 normal_at(std::size_t i) const {
    const auto& d = normal.data();
    return {d[3 * i], d[3 * i + 1], d[3 * i + 2]};
  }
};

/// Texel (i, j) samples UV ((i+0.5)/res, (j+0.5)/res).
inline Vec2 texel_center(int i, int j, int res) { return {(i + 0.5) / res, (j + 0.5) / res}; }

/// Barycentric coordinates of p with respect to triangle (a, b, c) in 2D.
/// Returns false for degenerate triangles.
inline bool barycentric_2d(Vec2 a, Vec2 b, Vec2 c, Vec2 p, std::array<double, 3>& out) {
  const double area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  if (area == 0) return false;
  out[0] = ((b.x - p.x) * (c.y - p.y) - (b.y - p.y) * (c.x - p.x)) / area;
  out[1] = ((c.x - p.x) * (a.y - p.y) - (c.y - p.y) * (a.x - p.x)) / area;
  out[2] = 1.0 - out[0] - out[1];
  return true;
}

/// Rasterizes every triangle in UV space at texel centers. Overlapping charts
/// resolve to the last triangle; texels claimed by two triangle interiors are
/// counted in contested_texels.
inline UvAtlasMaps bake_atlas_maps(const TriMesh& mesh, int resolution) {
  require(resolution >= 4, "atlas resolution must be at least 4");
  UvAtlasMaps maps;
  maps.resolution = resolution;
  maps.position = Image(resolution, resolution, 3);
  maps.normal = Image(resolution, resolution, 3);
  maps.validity = Mask(resolution, resolution);
  maps.triangle.assign(maps.texel_count(), -1);
  maps.triangle_count = mesh.triangle_count();
  maps.bounds = mesh_bounds(mesh);

  constexpr double kInterior = 1e-9;
  std::vector<std::uint8_t> contested(maps.texel_count(), 0);
  std::vector<std::uint8_t> strict(maps.texel_count(), 0);

  parallel_for(0, resolution, [&](int j) {
    const double v = (j + 0.5) / resolution;
    for (int f = 0; f < mesh.triangle_count(); ++f) {
      const auto& uv = mesh.uvs[f];
      const double vmin = std::min({uv[0].y, uv[1].y, uv[2].y});
      const double vmax = std::max({uv[0].y, uv[1].y, uv[2].y});
      if (v < vmin || v > vmax) continue;
      const double umin = std::min({uv[0].x, uv[1].x, uv[2].x});
      const double umax = std::max({uv[0].x, uv[1].x, uv[2].x});
      const int i0 = std::max(0, static_cast<int>(std::ceil(umin * resolution - 0.5)));
      const int i1 = std::min(resolution - 1, static_cast<int>(std::floor(umax * resolution - 0.5)));
      for (int i = i0; i <= i1; ++i) {
        std::array<double, 3> bc;
        if (!barycentric_2d(uv[0], uv[1], uv[2], texel_center(i, j, resolution), bc)) continue;
        if (bc[0] < 0 || bc[1] < 0 || bc[2] < 0) continue;
        const auto t = static_cast<std::size_t>(j) * resolution + i;
        const bool interior = std::min({bc[0], bc[1], bc[2]}) > kInterior;
        if (interior && strict[t]) contested[t] = 1;
        strict[t] = interior ? 1 : 0;
        const auto& tri = mesh.triangles[f];
        const auto p = mesh.positions[tri[0]] * bc[0] + mesh.positions[tri[1]] * bc[1] +
                       mesh.positions[tri[2]] * bc[2];
        auto n = normalize(mesh.normals[tri[0]] * bc[0] + mesh.normals[tri[1]] * bc[1] +
                           mesh.normals[tri[2]] * bc[2]);
        if (length_squared(n) == 0) n = mesh.face_normal(f);
        for (int c = 0; c < 3; ++c) {
          maps.position.at(i, j, c) = p[c];
          maps.normal.at(i, j, c) = n[c];
        }
        maps.validity.set(t, true);
        maps.triangle[t] = f;
      }
    }
  });
  maps.contested_texels = static_cast<int>(std::count(contested.begin(), contested.end(), 1));
  return maps;
}

}  // namespace flexpaint
