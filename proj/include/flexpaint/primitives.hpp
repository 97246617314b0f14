// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <utility>

#include "flexpaint/mesh.hpp"

// Procedural meshes with UV atlases, used by the tests, the acceptance suite
// and the `builtin:` mesh paths of the CLI.

namespace flexpaint {

/// Unit quad in the z=0 plane facing +z, spanning [-1,1]^2, UVs covering the
/// whole atlas.
inline TriMesh make_quad(double half_size = 1.0, double z = 0.0) {
  std::vector<Vec3> p = {{-half_size, -half_size, z}, {half_size, -half_size, z},
                         {half_size, half_size, z}, {-half_size, half_size, z}};
  std::vector<Triangle> t = {{0, 1, 2}, {0, 2, 3}};
  std::vector<CornerUvs> uv = {{Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}}, {Vec2{0, 0}, Vec2{1, 1}, Vec2{0, 1}}};
  return make_mesh(std::move(p), t, uv, std::vector<Vec3>(4, Vec3{0, 0, 1}));
}

/// Axis-aligned cube [-h,h]^3 with one chart per face laid out in a 3x2 grid
/// (faces +x, -x, +y, -y, +z, -z in row-major order). Vertices are not shared
/// between faces so normals are flat.
inline TriMesh make_cube(double half_size = 1.0) {
  const Vec3 axes[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  std::vector<Vec3> p, n;
  std::vector<Triangle> t;
  std::vector<CornerUvs> uv;
  for (int f = 0; f < 6; ++f) {
    const auto normal = axes[f];
    const Vec3 helper = std::abs(normal.y) > 0.5 ? Vec3{0, 0, 1} : Vec3{0, 1, 0};
    const auto s = normalize(cross(helper, normal));
    const auto tt = cross(normal, s);
    const double u0 = (f % 3) / 3.0, v0 = (f / 3) / 2.0;
    const std::pair<int, int> signs[4] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    Vec2 corner_uv[4];
    const int base = static_cast<int>(p.size());
    for (int k = 0; k < 4; ++k) {
      const auto [a, b] = signs[k];
      p.push_back((normal + s * a + tt * b) * half_size);
      n.push_back(normal);
      corner_uv[k] = {u0 + (a + 1) * 0.5 / 3.0, v0 + (b + 1) * 0.5 / 2.0};
    }
    t.push_back({base, base + 1, base + 2});
    uv.push_back({corner_uv[0], corner_uv[1], corner_uv[2]});
    t.push_back({base, base + 2, base + 3});
    uv.push_back({corner_uv[0], corner_uv[2], corner_uv[3]});
  }
  return make_mesh(std::move(p), t, uv, std::move(n));
}

/// Subdivided icosahedron on the unit sphere (20 * 4^level faces; level 2
/// gives 320). Every triangle gets its own right-triangle chart in a square
/// grid of cells, inset by `margin` cell fractions.
inline TriMesh make_icosphere(int level = 2, double radius = 1.0, double margin = 0.08) {
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> p = {{-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0}, {0, -1, g}, {0, 1, g},
                         {0, -1, -g}, {0, 1, -g}, {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1}};
  for (auto& v : p) v = normalize(v);
  std::vector<Triangle> t = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      if (auto it = midpoints.find(key); it != midpoints.end()) return it->second;
      p.push_back(normalize((p[a] + p[b]) * 0.5));
      return midpoints[key] = static_cast<int>(p.size()) - 1;
    };
    std::vector<Triangle> next;
    next.reserve(t.size() * 4);
    for (const auto& f : t) {
      const int a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    t = std::move(next);
  }
  const int cells = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(t.size()))));
  const double cell = 1.0 / cells;
  std::vector<CornerUvs> uv;
  uv.reserve(t.size());
  for (std::size_t f = 0; f < t.size(); ++f) {
    const double u0 = (f % cells) * cell, v0 = (f / cells) * cell, m = margin * cell;
    uv.push_back({Vec2{u0 + m, v0 + m}, Vec2{u0 + cell - m, v0 + m}, Vec2{u0 + m, v0 + cell - m}});
  }
  std::vector<Vec3> n = p;
  for (auto& v : p) v = v * radius;
  return make_mesh(std::move(p), t, uv, std::move(n));
}

}  // namespace flexpaint
