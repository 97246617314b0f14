// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <png.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "flexpaint/mesh.hpp"
#include "flexpaint/reproject.hpp"
#include "flexpaint/texture.hpp"

// Image file I/O: 8-bit PNG (color, grids, textures with alpha = validity),
// 16-bit PNG for atlas inspection, and PFM for raw float maps.

namespace flexpaint {

inline std::uint8_t to_byte(double v) {
  if (!(v > 0)) return 0;
  if (v >= 1) return 255;
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

namespace detail {

inline void write_png(const std::string& path, int width, int height, png_uint_32 format, const void* pixels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels, 0, nullptr))
    throw Error("cannot write PNG '" + path + "': " + image.message);
}

}  // namespace detail

/// Writes a 1-, 3- or 4-channel image as 8-bit PNG (values clamped to [0,1]).
inline void save_png(const Image& img, const std::string& path) {
  const int C = img.channels();
  require(C == 1 || C == 3 || C == 4, "PNG export supports 1, 3 or 4 channels");
  std::vector<std::uint8_t> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) bytes[i] = to_byte(img.data()[i]);
  const png_uint_32 fmt = C == 1 ? PNG_FORMAT_GRAY : (C == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_RGBA);
  detail::write_png(path, img.width(), img.height(), fmt, bytes.data());
}

/// 16-bit linear PNG, values remapped from [lo, hi] to the full range.
inline void save_png16(const Image& img, const std::string& path, double lo = 0.0, double hi = 1.0) {
  const int C = img.channels();
  require(C == 1 || C == 3 || C == 4, "PNG export supports 1, 3 or 4 channels");
  std::vector<png_uint_16> words(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = std::clamp((img.data()[i] - lo) / (hi - lo), 0.0, 1.0);
    words[i] = static_cast<png_uint_16>(std::lround(v * 65535.0));
  }
  const png_uint_32 fmt =
      PNG_FORMAT_FLAG_LINEAR | (C == 1 ? PNG_FORMAT_GRAY : (C == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_RGBA));
  detail::write_png(path, img.width(), img.height(), fmt, words.data());
}

/// Reads any PNG as 8-bit RGBA in [0,1].
inline Image load_png_rgba(const std::string& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw Error("cannot read PNG '" + path + "': " + image.message);
  image.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, bytes.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error("cannot decode PNG '" + path + "': " + image.message);
  }
  Image out(static_cast<int>(image.width), static_cast<int>(image.height), 4);
  for (std::size_t i = 0; i < bytes.size(); ++i) out.data()[i] = bytes[i] / 255.0;
  return out;
}

inline Image drop_alpha(const Image& rgba) {
  Image rgb(rgba.width(), rgba.height(), 3);
  for (std::size_t p = 0; p < rgba.pixel_count(); ++p)
    for (int c = 0; c < 3; ++c) rgb.data()[3 * p + c] = rgba.data()[rgba.channels() * p + c];
  return rgb;
}

inline Image load_png_rgb(const std::string& path) { return drop_alpha(load_png_rgba(path)); }

/// Texture as RGBA PNG; alpha is 255 on valid texels, 128 on margin texels
/// and 0 elsewhere.
inline void save_texture_png(const TextureMap& tex, const std::string& path) {
  const int res = tex.resolution();
  Image rgba(res, res, 4);
  for (std::size_t t = 0; t < tex.texel_count(); ++t) {
    for (int c = 0; c < 3; ++c) rgba.data()[4 * t + c] = tex.colors.data()[3 * t + c];
    rgba.data()[4 * t + 3] = tex.validity[t] ? 1.0 : (tex.margin.size() && tex.margin[t] ? 128.0 / 255.0 : 0.0);
  }
  save_png(rgba, path);
}

/// Inverse of save_texture_png. Fully opaque texels are valid; RGB-only
/// files are valid everywhere.
inline TextureMap load_texture_png(const std::string& path) {
  const Image rgba = load_png_rgba(path);
  require(rgba.width() == rgba.height(), "texture PNG '" + path + "' is not square");
  TextureMap tex(rgba.width());
  for (std::size_t t = 0; t < tex.texel_count(); ++t) {
    const double a = rgba.data()[4 * t + 3];
    tex.validity.set(t, a >= 1.0);
    tex.margin.set(t, a > 0 && a < 1.0);
    for (int c = 0; c < 3; ++c) tex.colors.data()[3 * t + c] = tex.validity[t] ? rgba.data()[4 * t + c] : kSentinelColor[c];
  }
  return tex;
}

inline void save_mask_png(const Mask& mask, const std::string& path) {
  Image img(mask.width(), mask.height(), 1);
  for (std::size_t i = 0; i < mask.size(); ++i) img.data()[i] = mask[i] ? 1.0 : 0.0;
  save_png(img, path);
}

/// Portable float map (little-endian, bottom-to-top rows as the format
/// requires). 1-channel images write "Pf", 3-channel "PF".
inline void save_pfm(const Image& img, const std::string& path) {
  require(img.channels() == 1 || img.channels() == 3, "PFM supports 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write PFM '" + path + "'");
  out << (img.channels() == 3 ? "PF" : "Pf") << '\n' << img.width() << ' ' << img.height() << "\n-1.0\n";
  std::vector<float> row(static_cast<std::size_t>(img.width()) * img.channels());
  for (int y = img.height() - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = static_cast<float>(img.data()[img.index(0, y) + i]);
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
}

inline Image load_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open PFM '" + path + "'");
  std::string tag;
  int w = 0, h = 0;
  double scale = 0;
  in >> tag >> w >> h >> scale;
  in.get();
  require((tag == "PF" || tag == "Pf") && w > 0 && h > 0 && scale < 0, "unsupported PFM header in '" + path + "'");
  const int C = tag == "PF" ? 3 : 1;
  Image img(w, h, C);
  std::vector<float> row(static_cast<std::size_t>(w) * C);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    require(static_cast<bool>(in), "truncated PFM '" + path + "'");
    for (std::size_t i = 0; i < row.size(); ++i) img.data()[img.index(0, y) + i] = row[i];
  }
  return img;
}

/// Position map as PFM and normal map remapped from [-1,1] as 16-bit PNG.
inline void export_atlas(const UvAtlasMaps& atlas, const std::string& prefix) {
  save_pfm(atlas.position, prefix + "_position.pfm");
  save_png16(atlas.normal, prefix + "_normal.png", -1.0, 1.0);
  save_mask_png(atlas.validity, prefix + "_validity.png");
}

inline void export_partial(const PartialTexture& partial, const std::string& prefix) {
  save_png(partial.colors, prefix + ".png");
  save_mask_png(partial.covered, prefix + "_mask.png");
}

}  // namespace flexpaint
