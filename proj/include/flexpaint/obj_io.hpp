// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>

#include "flexpaint/mesh.hpp"

namespace flexpaint {

namespace detail {

inline int resolve_obj_index(std::string_view token, std::size_t count, int line, const char* what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw Error("line " + std::to_string(line) + ": malformed " + what + " index '" + std::string(token) + "'");
  // OBJ indices are 1-based; negative values count back from the end.
  if (value == 0)
    throw Error("line " + std::to_string(line) + ": " + what + " index 0 is invalid (OBJ is 1-based)");
  const long resolved = value > 0 ? value - 1 : static_cast<long>(count) + value;
  if (resolved < 0 || resolved >= static_cast<long>(count))
    throw Error("line " + std::to_string(line) + ": " + what + " index " + std::to_string(value) + " out of range");
  return static_cast<int>(resolved);
}

}  // namespace detail

/// Parses Wavefront OBJ text with v/vt/vn/f records. Polygons are
/// fan-triangulated. Unknown records are ignored.
inline TriMesh parse_obj(std::istream& in) {
  std::vector<Vec3> positions, obj_normals;
  std::vector<Vec2> texcoords;
  std::vector<Triangle> triangles;
  std::vector<CornerUvs> uvs;
  std::vector<Vec3> normal_sum;
  bool any_normals = false, any_face_without_uv = false;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream line(raw);
    std::string tag;
    if (!(line >> tag)) continue;
    auto fail = [&](const std::string& msg) { throw Error("line " + std::to_string(line_no) + ": " + msg); };
    if (tag == "v") {
      Vec3 p;
      if (!(line >> p.x >> p.y >> p.z)) fail("malformed vertex record");
      positions.push_back(p);
    } else if (tag == "vt") {
      Vec2 t;
      if (!(line >> t.x >> t.y)) fail("malformed texture coordinate record");
      texcoords.push_back(t);
    } else if (tag == "vn") {
      Vec3 n;
      if (!(line >> n.x >> n.y >> n.z)) fail("malformed normal record");
      obj_normals.push_back(n);
    } else if (tag == "f") {
      std::vector<int> vi, ti, ni;
      std::string corner;
      while (line >> corner) {
        std::string_view sv(corner);
        auto s1 = sv.find('/');
        vi.push_back(detail::resolve_obj_index(sv.substr(0, s1), positions.size(), line_no, "vertex"));
        int t = -1, n = -1;
        if (s1 != std::string_view::npos) {
          auto rest = sv.substr(s1 + 1);
          auto s2 = rest.find('/');
          auto tpart = rest.substr(0, s2);
          if (!tpart.empty()) t = detail::resolve_obj_index(tpart, texcoords.size(), line_no, "texture coordinate");
          if (s2 != std::string_view::npos && s2 + 1 < rest.size())
            n = detail::resolve_obj_index(rest.substr(s2 + 1), obj_normals.size(), line_no, "normal");
        }
        ti.push_back(t);
        ni.push_back(n);
      }
      if (vi.size() < 3) fail("face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < vi.size(); ++k) {
        const std::size_t c[3] = {0, k, k + 1};
        Triangle tri;
        CornerUvs cuv;
        for (int m = 0; m < 3; ++m) {
          tri[m] = vi[c[m]];
          if (ti[c[m]] < 0) {
            any_face_without_uv = true;
          } else {
            cuv[m] = texcoords[ti[c[m]]];
            if (cuv[m].x < 0 || cuv[m].x > 1 || cuv[m].y < 0 || cuv[m].y > 1)
              fail("texture coordinate outside [0,1]");
          }
          if (ni[c[m]] >= 0) {
            if (normal_sum.size() < positions.size()) normal_sum.resize(positions.size());
            normal_sum[vi[c[m]]] += obj_normals[ni[c[m]]];
            any_normals = true;
          }
        }
        triangles.push_back(tri);
        uvs.push_back(cuv);
      }
    }
  }
  if (texcoords.empty() || any_face_without_uv) throw Error("mesh has no UV atlas");
  std::vector<Vec3> normals;
  if (any_normals) {
    // vertices without a referenced vn fall back to the face-derived normal
    normal_sum.resize(positions.size());
    auto computed = compute_vertex_normals(positions, triangles);
    normals.resize(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i)
      normals[i] = length_squared(normal_sum[i]) > 0 ? normalize(normal_sum[i]) : computed[i];
  }
  return make_mesh(std::move(positions), triangles, uvs, std::move(normals));
}

inline TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file '" + path + "'");
  try {
    return parse_obj(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

/// Writes positions, per-corner UVs (one vt per corner) and per-vertex normals.
inline void write_obj(const TriMesh& mesh, std::ostream& out) {
  out << std::setprecision(17);
  for (const auto& p : mesh.positions) out << "v " << p.x << ' ' << p.y << ' ' << p.z << '\n';
  for (const auto& n : mesh.normals) out << "vn " << n.x << ' ' << n.y << ' ' << n.z << '\n';
  for (const auto& c : mesh.uvs)
    for (const auto& uv : c) out << "vt " << uv.x << ' ' << uv.y << '\n';
  for (int f = 0; f < mesh.triangle_count(); ++f) {
    out << 'f';
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.triangles[f][k] + 1;
      out << ' ' << v << '/' << (3 * f + k + 1) << '/' << v;
    }
    out << '\n';
  }
}

inline void save_obj(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mesh file '" + path + "'");
  write_obj(mesh, out);
}

}  // namespace flexpaint
