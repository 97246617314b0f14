// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include "flexpaint/mesh.hpp"
#include "flexpaint/texture.hpp"

namespace flexpaint {

// -----------------------------------------------------------------------------
// Margin dilation
// -----------------------------------------------------------------------------

/// Grows valid colors outward ring by ring through the 8-neighborhood. Each
/// new texel takes the mean of its already-colored neighbors. Validity is
/// unchanged; filled texels are flagged in `margin`.
inline TextureMap dilate_margins(const TextureMap& texture, int pixels) {
  validate_texture(texture);
  require(pixels >= 0, "margin width must be non-negative");
  if (pixels == 0) return texture;
  const int res = texture.resolution();
  TextureMap out = texture;
  out.margin = Mask(res, res);
  Mask colored = texture.validity;
  for (int ring = 0; ring < pixels; ++ring) {
    Mask next = colored;
    bool grew = false;
    for (int j = 0; j < res; ++j)
      for (int i = 0; i < res; ++i) {
        if (colored(i, j)) continue;
        Color sum{0, 0, 0};
        int n = 0;
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            const int x = i + di, y = j + dj;
            if ((di == 0 && dj == 0) || x < 0 || y < 0 || x >= res || y >= res || !colored(x, y)) continue;
            const auto c = out.color(static_cast<std::size_t>(y) * res + x);
            for (int k = 0; k < 3; ++k) sum[k] += c[k];
            ++n;
          }
        if (n == 0) continue;
        const auto t = static_cast<std::size_t>(j) * res + i;
        next.set(t, true);
        out.margin.set(t, true);
        grew = true;
        for (auto& s : sum) s /= n;
        out.set_color(t, sum);
      }
    // texels added in this ring are read only from the next ring on
    colored = std::move(next);
    if (!grew) break;
  }
  return out;
}

// -----------------------------------------------------------------------------
// 3D-aware completion
// -----------------------------------------------------------------------------

struct CompletionOptions {
  int neighbors = 8;
  double power = 2.0;
};

namespace detail {

/// Uniform grid over valid texel positions for k-nearest queries.
class PointGrid {
 public:
  PointGrid(const std::vector<Vec3>& points, const Bounds& bounds, double cell)
      : points_(points), origin_(bounds.min), cell_(cell) {
    const auto ext = bounds.extent();
    for (int a = 0; a < 3; ++a) dims_[a] = std::max(1, static_cast<int>(std::floor(ext[a] / cell)) + 1);
    cells_.resize(static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2]);
    for (int i = 0; i < static_cast<int>(points.size()); ++i) cells_[flat(cell_of(points[i]))].push_back(i);
  }

  /// k nearest points ordered by (squared distance, index).
  std::vector<std::pair<double, int>> nearest(Vec3 q, int k) const {
    std::vector<std::pair<double, int>> found;
    const auto c = cell_of(q);
    const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
    for (int r = 0; r <= max_ring; ++r) {
      for (int z = c[2] - r; z <= c[2] + r; ++z)
        for (int y = c[1] - r; y <= c[1] + r; ++y)
          for (int x = c[0] - r; x <= c[0] + r; ++x) {
            if (std::max({std::abs(x - c[0]), std::abs(y - c[1]), std::abs(z - c[2])}) != r) continue;
            if (x < 0 || y < 0 || z < 0 || x >= dims_[0] || y >= dims_[1] || z >= dims_[2]) continue;
            for (int i : cells_[flat({x, y, z})]) found.emplace_back(length_squared(points_[i] - q), i);
          }
      if (static_cast<int>(found.size()) >= k) {
        std::sort(found.begin(), found.end());
        const double reach = r * cell_;
        // everything in ring r+1 is at least r*cell away from q
        if (found[k - 1].first <= reach * reach) break;
      }
    }
    std::sort(found.begin(), found.end());
    if (static_cast<int>(found.size()) > k) found.resize(k);
    return found;
  }

 private:
  std::array<int, 3> cell_of(Vec3 p) const {
    std::array<int, 3> c;
    for (int a = 0; a < 3; ++a)
      c[a] = std::clamp(static_cast<int>(std::floor((p[a] - origin_[a]) / cell_)), 0, dims_[a] - 1);
    return c;
  }
  std::size_t flat(std::array<int, 3> c) const {
    return (static_cast<std::size_t>(c[2]) * dims_[1] + c[1]) * dims_[0] + c[0];
  }

  const std::vector<Vec3>& points_;
  Vec3 origin_;
  double cell_;
  std::array<int, 3> dims_{};
  std::vector<std::vector<int>> cells_;
};

}  // namespace detail

/// Inverse-distance weighted color from neighbors sorted by (distance,
/// index). Zero-distance neighbors, if any, are averaged instead.
inline Color idw_color(const std::vector<std::pair<double, int>>& neighbors, const std::vector<Color>& colors,
                       double power) {
  Color out{0, 0, 0};
  if (neighbors.front().first == 0) {
    int n = 0;
    for (const auto& [d2, i] : neighbors) {
      if (d2 != 0) break;
      for (int k = 0; k < 3; ++k) out[k] += colors[i][k];
      ++n;
    }
    for (auto& c : out) c /= n;
    return out;
  }
  double wsum = 0;
  for (const auto& [d2, i] : neighbors) {
    const double w = 1.0 / std::pow(d2, 0.5 * power);
    wsum += w;
    for (int k = 0; k < 3; ++k) out[k] += w * colors[i][k];
  }
  for (auto& c : out) c /= wsum;
  return out;
}

/// Fills every atlas-valid texel missing from `partial` with the
/// inverse-distance weighted mean of its k nearest valid texels, distance
/// measured between surface points of the position map. Valid texels are
/// copied unchanged; the output is valid wherever the atlas is.
inline TextureMap complete_texture(const TextureMap& partial, const UvAtlasMaps& atlas, CompletionOptions options = {}) {
  validate_texture(partial);
  require(partial.resolution() == atlas.resolution, "texture and atlas resolutions differ");
  require(options.neighbors >= 1, "neighbor count must be at least 1");
  std::vector<Vec3> points;
  std::vector<Color> colors;
  for (std::size_t t = 0; t < partial.texel_count(); ++t) {
    if (!partial.validity[t]) continue;
    require(atlas.validity[t], "partial texture is valid outside the atlas");
    points.push_back(atlas.position_at(t));
    colors.push_back(partial.color(t));
  }
  require(!points.empty(), "texture has no valid texels to complete from");

  const auto ext = atlas.bounds.extent();
  const double extent = std::max({ext.x, ext.y, ext.z});
  const double cell = extent > 0 ? 2.0 * extent / atlas.resolution : 1.0;
  Bounds b = atlas.bounds;
  for (const auto& p : points) b.extend(p);
  const detail::PointGrid grid(points, b, cell);

  TextureMap out = partial;
  out.margin = Mask(atlas.resolution, atlas.resolution);
  const int res = atlas.resolution;
  const int k = std::min<int>(options.neighbors, static_cast<int>(points.size()));
  parallel_for(0, res, [&](int j) {
    for (int i = 0; i < res; ++i) {
      const auto t = static_cast<std::size_t>(j) * res + i;
      if (!atlas.validity[t] || partial.validity[t]) continue;
      out.set_color(t, idw_color(grid.nearest(atlas.position_at(t), k), colors, options.power));
      out.validity.set(t, true);
    }
  });
  return out;
}

// -----------------------------------------------------------------------------
// Enhancement
// -----------------------------------------------------------------------------

struct EnhanceOptions {
  int factor = 4;
  double sharpen = 0.5;  // unsharp-mask amount
  int margin = 4;        // dilation width in output texels
};

namespace detail {

/// Keys cubic convolution kernel, a = -0.5.
inline double keys_cubic(double x) {
  x = std::abs(x);
  if (x < 1) return (1.5 * x - 2.5) * x * x + 1;
  if (x < 2) return ((-0.5 * x + 2.5) * x - 4) * x + 2;
  return 0;
}

}  // namespace detail

/// Upsamples by `factor` with bicubic interpolation restricted to valid
/// source texels, sharpens valid texels with an unsharp mask whose blur also
/// ignores invalid texels, then dilates margins. Output validity is the
/// high-resolution atlas validity where some valid source texel lies in the
/// 4x4 support.
inline TextureMap enhance_texture(const TextureMap& texture, const UvAtlasMaps& atlas_hi, EnhanceOptions options = {}) {
  validate_texture(texture);
  require(options.factor == 2 || options.factor == 4, "enhancement factor must be 2 or 4");
  const int lo = texture.resolution(), f = options.factor, hi = lo * f;
  require(atlas_hi.resolution == hi, "high-resolution atlas does not match the upscaled size");

  TextureMap up(hi);
  parallel_for(0, hi, [&](int J) {
    for (int I = 0; I < hi; ++I) {
      const auto T = static_cast<std::size_t>(J) * hi + I;
      if (!atlas_hi.validity[T]) continue;
      const double sx = (I + 0.5) / f - 0.5, sy = (J + 0.5) / f - 0.5;
      const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
      Color cubic{0, 0, 0}, linear{0, 0, 0};
      double wc = 0, wl = 0;
      for (int dy = -1; dy <= 2; ++dy)
        for (int dx = -1; dx <= 2; ++dx) {
          const int x = x0 + dx, y = y0 + dy;
          if (x < 0 || y < 0 || x >= lo || y >= lo) continue;
          const auto t = static_cast<std::size_t>(y) * lo + x;
          if (!texture.validity[t]) continue;
          const auto c = texture.color(t);
          const double w = detail::keys_cubic(sx - x) * detail::keys_cubic(sy - y);
          const double wlin = std::max(0.0, 1 - std::abs(sx - x)) * std::max(0.0, 1 - std::abs(sy - y));
          // distant support still counts so isolated texels are reachable
          const double wfar = 1e-3 / (1 + (sx - x) * (sx - x) + (sy - y) * (sy - y));
          wc += w;
          wl += wlin + wfar;
          for (int k = 0; k < 3; ++k) cubic[k] += w * c[k], linear[k] += (wlin + wfar) * c[k];
        }
      if (wl == 0) continue;
      Color c;
      // near-cancelling cubic weights fall back to the positive kernel
      for (int k = 0; k < 3; ++k) c[k] = wc > 0.5 ? cubic[k] / wc : linear[k] / wl;
      up.set_color(T, c);
      up.validity.set(T, true);
    }
  });

  TextureMap sharp = up;
  if (options.sharpen != 0) {
    parallel_for(0, hi, [&](int J) {
      for (int I = 0; I < hi; ++I) {
        const auto T = static_cast<std::size_t>(J) * hi + I;
        if (!up.validity[T]) continue;
        Color blur{0, 0, 0};
        double ws = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int x = I + dx, y = J + dy;
            if (x < 0 || y < 0 || x >= hi || y >= hi) continue;
            const auto t = static_cast<std::size_t>(y) * hi + x;
            if (!up.validity[t]) continue;
            const double w = (dx == 0 ? 2.0 : 1.0) * (dy == 0 ? 2.0 : 1.0);
            ws += w;
            const auto c = up.color(t);
            for (int k = 0; k < 3; ++k) blur[k] += w * c[k];
          }
        const auto c = up.color(T);
        Color s;
        for (int k = 0; k < 3; ++k) s[k] = c[k] + options.sharpen * (c[k] - blur[k] / ws);
        sharp.set_color(T, s);
      }
    });
  }
  return dilate_margins(sharp, options.margin);
}

/// Injection points for learned completion and enhancement models.
using CompletionFn = std::function<TextureMap(const TextureMap&, const UvAtlasMaps&)>;
using EnhancementFn = std::function<TextureMap(const TextureMap&, const UvAtlasMaps&)>;

}  // namespace flexpaint
