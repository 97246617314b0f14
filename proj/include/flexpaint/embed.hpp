// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flexpaint/core.hpp"

// Deterministic stand-ins for the text and image encoders plus the linear
// conditioning arithmetic built on top of them. Real encoders can replace
// TextEmbedder / ImageEmbedder without touching aggregate() or the sampler.

namespace flexpaint {

enum class Modality : std::uint16_t { text = 0, image = 1 };

struct Embedding {
  std::vector<double> values;
  Modality modality = Modality::text;

  int dimension() const { return static_cast<int>(values.size()); }
  friend bool operator==(const Embedding&, const Embedding&) = default;
};

inline constexpr int kDefaultEmbeddingDim = 64;
inline constexpr std::uint64_t kEmbedSeed = 0x5EEDF1E7u;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Uniform in [-1, 1).
inline double signed_unit(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001B3ull;
  return h;
}

inline std::vector<std::string> tokenize(std::string_view prompt) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : prompt) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

inline void normalize_in_place(std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  if (s > 0)
    for (double& x : v) x /= s;
}

}  // namespace detail

/// Bag-of-tokens text embedding: each lower-cased alphanumeric token hashes
/// to a pseudo-random direction; the sum is L2-normalized. Prompts without
/// tokens map to a fixed canonical unit vector.
inline Embedding embed_text(std::string_view prompt, int dim = kDefaultEmbeddingDim) {
  require(dim > 0, "embedding dimension must be positive");
  Embedding e{std::vector<double>(dim, 0.0), Modality::text};
  auto tokens = detail::tokenize(prompt);
  if (tokens.empty()) {
    std::uint64_t state = kEmbedSeed ^ 0xE3B0C44298FC1C14ull;
    for (auto& x : e.values) x = detail::signed_unit(state);
  }
  for (const auto& tok : tokens) {
    std::uint64_t state = detail::fnv1a(tok) ^ kEmbedSeed;
    for (auto& x : e.values) x += detail::signed_unit(state);
  }
  detail::normalize_in_place(e.values);
  return e;
}

// -----------------------------------------------------------------------------
// Image embedding
// -----------------------------------------------------------------------------

/// Rec.709 luma; exact on achromatic pixels.
inline double luminance(double r, double g, double b) {
  if (r == g && g == b) return r;
  return 0.2126 * r + 0.7152 * g + 0.0722 * b;
}

inline constexpr int kHistogramBins = 8;
inline constexpr int kLumaFeatureCount = 1 + kHistogramBins + 16;
inline constexpr int kChromaFeatureCount = 2 + 2 * kHistogramBins;

/// Raw image statistics split into a luminance part (mean Y, Y histogram,
/// 4x4 downsampled Y) and a chroma part (mean R-G, mean B-Y, R and B
/// histograms minus the G histogram). Every chroma feature is exactly zero for
/// an achromatic image.
struct ImageFeatures {
  std::vector<double> luma;
  std::vector<double> chroma;
};

inline ImageFeatures image_features(const Image& image) {
  require(image.width() > 0 && image.height() > 0, "cannot embed a zero-size image");
  require(image.channels() == 3, "image embedding expects an RGB image");
  const int W = image.width(), H = image.height();
  const double n = static_cast<double>(W) * H;
  auto bin = [](double v) { return std::clamp(static_cast<int>(std::floor(v * kHistogramBins)), 0, kHistogramBins - 1); };

  ImageFeatures f;
  f.luma.assign(kLumaFeatureCount, 0.0);
  f.chroma.assign(kChromaFeatureCount, 0.0);
  std::vector<double> hr(kHistogramBins), hg(kHistogramBins), hb(kHistogramBins);
  std::vector<double> block_sum(16), block_n(16);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const double r = image.at(x, y, 0), g = image.at(x, y, 1), b = image.at(x, y, 2);
      const double lum = luminance(r, g, b);
      f.luma[0] += lum;
      f.luma[1 + bin(lum)] += 1;
      f.chroma[0] += r - g;
      f.chroma[1] += b - lum;
      hr[bin(r)] += 1, hg[bin(g)] += 1, hb[bin(b)] += 1;
      const int bx = std::min(3, x * 4 / W), by = std::min(3, y * 4 / H);
      block_sum[by * 4 + bx] += lum;
      block_n[by * 4 + bx] += 1;
    }
  f.luma[0] /= n;
  for (int k = 0; k < kHistogramBins; ++k) f.luma[1 + k] /= n;
  for (int blk = 0; blk < 16; ++blk) {
    if (block_n[blk] > 0) {
      f.luma[1 + kHistogramBins + blk] = block_sum[blk] / block_n[blk];
    } else {
      // images narrower than 4 pixels: nearest pixel to the block center
      const int x = std::min(W - 1, static_cast<int>((blk % 4 + 0.5) * W / 4));
      const int y = std::min(H - 1, static_cast<int>((blk / 4 + 0.5) * H / 4));
      f.luma[1 + kHistogramBins + blk] = luminance(image.at(x, y, 0), image.at(x, y, 1), image.at(x, y, 2));
    }
  }
  f.chroma[0] /= n;
  f.chroma[1] /= n;
  for (int k = 0; k < kHistogramBins; ++k) {
    f.chroma[2 + k] = (hr[k] - hg[k]) / n;
    f.chroma[2 + kHistogramBins + k] = (hb[k] - hg[k]) / n;
  }
  return f;
}

/// Number of trailing embedding components driven only by chroma features.
inline int chroma_dimension(int dim) { return std::max(1, dim / 4); }

/// Image embedding layout: values[0, D - D/4) project the luminance features,
/// values[D - D/4, D) project the chroma features. Not normalized, so the
/// conditioning scale factors act on its magnitude.
inline Embedding embed_image(const Image& image, int dim = kDefaultEmbeddingDim) {
  require(dim >= 2, "image embedding dimension must be at least 2");
  const auto f = image_features(image);
  const int chroma_dim = chroma_dimension(dim), luma_dim = dim - chroma_dim;
  Embedding e{std::vector<double>(dim, 0.0), Modality::image};
  std::uint64_t state = kEmbedSeed ^ 0x1A9E5EEDull;
  const double luma_scale = 1.0 / std::sqrt(static_cast<double>(kLumaFeatureCount));
  for (int r = 0; r < luma_dim; ++r)
    for (double feat : f.luma) e.values[r] += detail::signed_unit(state) * luma_scale * feat;
  state = kEmbedSeed ^ 0xC4120A5Eull;
  const double chroma_scale = 1.0 / std::sqrt(static_cast<double>(kChromaFeatureCount));
  for (int r = luma_dim; r < dim; ++r)
    for (double feat : f.chroma) e.values[r] += detail::signed_unit(state) * chroma_scale * feat;
  return e;
}

inline std::span<const double> chroma_components(const Embedding& e) {
  const int cd = chroma_dimension(e.dimension());
  return std::span<const double>(e.values).subspan(e.values.size() - cd);
}

/// Replicates the Rec.709 luminance into all three channels.
inline Image to_grayscale(const Image& image) {
  require(image.channels() == 3, "grayscale conversion expects an RGB image");
  Image out(image.width(), image.height(), 3);
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    const auto* px = &image.data()[3 * p];
    const double y = luminance(px[0], px[1], px[2]);
    for (int c = 0; c < 3; ++c) out.data()[3 * p + c] = y;
  }
  return out;
}

/// Negative embedding for stylization: the embedding of the reference with
/// its color removed.
inline Embedding grayscale_negative(const Image& reference, int dim = kDefaultEmbeddingDim) {
  require(reference.width() > 0 && reference.height() > 0, "cannot embed a zero-size image");
  return embed_image(to_grayscale(reference), dim);
}

inline constexpr int kWhiteNegativeSize = 64;

/// Default CFG negative: embedding of an all-white 64x64 image.
inline Embedding white_negative(int dim = kDefaultEmbeddingDim) {
  return embed_image(Image(kWhiteNegativeSize, kWhiteNegativeSize, 3, 1.0), dim);
}

// -----------------------------------------------------------------------------
// Condition aggregation
// -----------------------------------------------------------------------------

/// Positive condition as an ordered (text, image) slot pair plus the CFG
/// negative. The image slot is the alpha-weighted sum of image embeddings.
struct ConditionBundle {
  Embedding text;
  Embedding image_slot{{}, Modality::image};
  Embedding negative{{}, Modality::image};
  std::vector<double> alphas;

  /// Concatenated [text | image_slot] vector.
  std::vector<double> positive() const {
    std::vector<double> v = text.values;
    v.insert(v.end(), image_slot.values.begin(), image_slot.values.end());
    return v;
  }
};

struct WeightedImageEmbedding {
  double alpha = 1.0;
  Embedding embedding;
};

/// text (+) sum_i alpha_i * image_i. The negative slot defaults to
/// white_negative() at the text dimension.
inline ConditionBundle aggregate(const Embedding& text, const std::vector<WeightedImageEmbedding>& images) {
  require(text.modality == Modality::text, "first slot must hold a text embedding");
  const int dim = text.dimension();
  ConditionBundle b;
  b.text = text;
  b.image_slot = Embedding{std::vector<double>(dim, 0.0), Modality::image};
  for (const auto& [alpha, e] : images) {
    require(e.modality == Modality::image, "image slot received a non-image embedding");
    require(e.dimension() == dim, "embedding dimensions differ");
    require(std::isfinite(alpha), "non-finite image scale factor");
    for (int k = 0; k < dim; ++k) b.image_slot.values[k] += alpha * e.values[k];
    b.alphas.push_back(alpha);
  }
  b.negative = white_negative(dim);
  return b;
}

// -----------------------------------------------------------------------------
// Binary embedding files: 16-byte header then little-endian float64 values.
//   bytes 0-3  magic "FPEM"
//   bytes 4-7  uint32 dimension
//   bytes 8-9  uint16 modality (0 text, 1 image)
//   bytes 10-11 uint16 bytes per value (8)
//   bytes 12-15 reserved, zero
// -----------------------------------------------------------------------------

inline std::string serialize_embedding(const Embedding& e) {
  std::string out(16 + 8 * e.values.size(), '\0');
  auto put = [&](std::size_t off, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out[off + i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  };
  std::memcpy(out.data(), "FPEM", 4);
  put(4, static_cast<std::uint32_t>(e.values.size()), 4);
  put(8, static_cast<std::uint16_t>(e.modality), 2);
  put(10, 8, 2);
  for (std::size_t k = 0; k < e.values.size(); ++k) {
    std::uint64_t bits;
    std::memcpy(&bits, &e.values[k], 8);
    put(16 + 8 * k, bits, 8);
  }
  return out;
}

inline Embedding deserialize_embedding(std::string_view bytes) {
  require(bytes.size() >= 16 && bytes.substr(0, 4) == "FPEM", "not an embedding file");
  auto get = [&](std::size_t off, int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
    return v;
  };
  const auto dim = get(4, 4);
  const auto modality = get(8, 2);
  require(get(10, 2) == 8, "unsupported embedding value width");
  require(modality <= 1, "unknown embedding modality");
  require(bytes.size() == 16 + 8 * dim, "embedding file size does not match header");
  Embedding e{std::vector<double>(dim), static_cast<Modality>(modality)};
  for (std::size_t k = 0; k < dim; ++k) {
    const auto bits = get(16 + 8 * k, 8);
    std::memcpy(&e.values[k], &bits, 8);
  }
  return e;
}

inline void save_embedding(const Embedding& e, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write embedding file '" + path + "'");
  const auto bytes = serialize_embedding(e);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline Embedding load_embedding(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open embedding file '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_embedding(bytes);
}

}  // namespace flexpaint
