// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "flexpaint/core.hpp"

namespace flexpaint {

using Color = std::array<double, 3>;

/// Color written to texels outside the validity mask.
inline constexpr Color kSentinelColor{0.0, 0.0, 0.0};

/// Square RGB texel grid in UV space. `margin` flags invalid texels whose
/// color was filled by margin dilation; it never overlaps `validity`.
struct TextureMap {
  Image colors;
  Mask validity;
  Mask margin;

  TextureMap() = default;
  explicit TextureMap(int resolution, Color fill = kSentinelColor, bool valid = false)
      : colors(resolution, resolution, 3), validity(resolution, resolution, valid),
        margin(resolution, resolution, false) {
    for (std::size_t i = 0; i < colors.pixel_count(); ++i)
      for (int c = 0; c < 3; ++c) colors.data()[3 * i + c] = fill[c];
  }

  int resolution() const { return colors.width(); }
  std::size_t texel_count() const { return colors.pixel_count(); }

  Color color(std::size_t i) const {
    const auto& d = colors.data();
    return {d[3 * i], d[3 * i + 1], d[3 * i + 2]};
  }
  void set_color(std::size_t i, const Color& c) {
    auto& d = colors.data();
    d[3 * i] = c[0], d[3 * i + 1] = c[1], d[3 * i + 2] = c[2];
  }
};

inline void validate_texture(const TextureMap& tex) {
  require(tex.resolution() > 0, "texture resolution must be positive");
  require(tex.colors.height() == tex.colors.width() && tex.colors.channels() == 3,
          "texture must be a square RGB grid");
  require(tex.validity.width() == tex.resolution() && tex.validity.height() == tex.resolution(),
          "texture validity mask shape mismatch");
}

enum class Sampling { nearest, bilinear };

/// Index of the texel whose cell contains (u, v), clamped to the atlas.
inline std::size_t nearest_texel(double u, double v, int res) {
  const int i = std::clamp(static_cast<int>(std::floor(u * res)), 0, res - 1);
  const int j = std::clamp(static_cast<int>(std::floor(v * res)), 0, res - 1);
  return static_cast<std::size_t>(j) * res + i;
}

/// Samples the texture at (u, v). `texel_valid` reports whether the nearest
/// texel is inside the validity mask.
inline Color sample_texture(const TextureMap& tex, double u, double v, Sampling mode, bool* texel_valid = nullptr) {
  const int res = tex.resolution();
  const auto nearest = nearest_texel(u, v, res);
  if (texel_valid) *texel_valid = tex.validity[nearest];
  if (mode == Sampling::nearest) return tex.color(nearest);
  const double x = u * res - 0.5, y = v * res - 0.5;
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0, fy = y - y0;
  Color out{0, 0, 0};
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx) {
      const int xi = std::clamp(x0 + dx, 0, res - 1), yi = std::clamp(y0 + dy, 0, res - 1);
      const double w = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy);
      const auto c = tex.color(static_cast<std::size_t>(yi) * res + xi);
      for (int k = 0; k < 3; ++k) out[k] += w * c[k];
    }
  return out;
}

}  // namespace flexpaint
