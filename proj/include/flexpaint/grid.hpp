// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "flexpaint/core.hpp"

namespace flexpaint {

struct GridLayout {
  int rows = 2;
  int cols = 2;
  int capacity() const { return rows * cols; }
};

/// Multi-view images tiled in row-major view order (view k at row k / cols,
/// column k % cols).
struct GridImage {
  std::vector<Image> tiles;
  GridLayout layout;

  int view_count() const { return static_cast<int>(tiles.size()); }
  int tile_width() const { return tiles.empty() ? 0 : tiles[0].width(); }
  int tile_height() const { return tiles.empty() ? 0 : tiles[0].height(); }
  int channels() const { return tiles.empty() ? 0 : tiles[0].channels(); }

  /// Packs the tiles into one image.
  Image assemble() const {
    require(view_count() == layout.capacity(), "grid tile count does not match layout capacity");
    const int w = tile_width(), h = tile_height(), c = channels();
    for (const auto& t : tiles) require(t.width() == w && t.height() == h && t.channels() == c, "grid tiles differ in shape");
    Image out(w * layout.cols, h * layout.rows, c);
    for (int k = 0; k < view_count(); ++k) {
      const int ox = (k % layout.cols) * w, oy = (k / layout.cols) * h;
      for (int y = 0; y < h; ++y)
        std::copy_n(&tiles[k].data()[tiles[k].index(0, y)], static_cast<std::size_t>(w) * c,
                    &out.data()[out.index(ox, oy + y)]);
    }
    return out;
  }

  /// Inverse of assemble().
  static GridImage split(const Image& image, GridLayout layout) {
    require(layout.rows > 0 && layout.cols > 0, "grid layout must be non-empty");
    require(image.width() % layout.cols == 0 && image.height() % layout.rows == 0,
            "image size is not divisible by the grid layout");
    const int w = image.width() / layout.cols, h = image.height() / layout.rows, c = image.channels();
    GridImage grid;
    grid.layout = layout;
    for (int k = 0; k < layout.capacity(); ++k) {
      Image tile(w, h, c);
      const int ox = (k % layout.cols) * w, oy = (k / layout.cols) * h;
      for (int y = 0; y < h; ++y)
        std::copy_n(&image.data()[image.index(ox, oy + y)], static_cast<std::size_t>(w) * c,
                    &tile.data()[tile.index(0, y)]);
      grid.tiles.push_back(std::move(tile));
    }
    return grid;
  }
};

/// Default layout for a view count: 2x2 for four views, otherwise one row.
inline GridLayout default_layout(int view_count) {
  if (view_count == 4) return {2, 2};
  return {1, view_count};
}

}  // namespace flexpaint
