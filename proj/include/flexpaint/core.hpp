// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace flexpaint {

/// Base exception for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

// -----------------------------------------------------------------------------
// Small vectors
// -----------------------------------------------------------------------------

struct Vec2 {
  double x = 0, y = 0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Vec3 {
  double x = 0, y = 0, z = 0;

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
  friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend Vec3 operator*(double s, Vec3 a) { return {a.x * s, a.y * s, a.z * s}; }
  friend Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
  Vec3& operator+=(Vec3 b) {
    x += b.x, y += b.y, z += b.z;
    return *this;
  }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(Vec3 a) { return std::sqrt(dot(a, a)); }
inline double length_squared(Vec3 a) { return dot(a, a); }
inline Vec3 normalize(Vec3 a) {
  auto l = length(a);
  return l > 0 ? a / l : Vec3{0, 0, 0};
}
inline Vec3 component_min(Vec3 a, Vec3 b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 component_max(Vec3 a, Vec3 b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

inline constexpr double kPi = 3.14159265358979323846;
inline double radians(double degrees) { return degrees * kPi / 180.0; }

// -----------------------------------------------------------------------------
// Dense images and masks
// -----------------------------------------------------------------------------

/// Row-major H x W x C grid of doubles. Row 0 is the top image row (or v-row 0
/// for textures). Also used as the sampler's tensor type.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0)
      : width_(width), height_(height), channels_(channels) {
    require(width >= 0 && height >= 0 && channels >= 0, "negative image dimension");
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }
  double& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<double> pixel(int x, int y) {
    return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)};
  }
  std::span<const double> pixel(int x, int y) const {
    return {data_.data() + index(x, y), static_cast<std::size_t>(channels_)};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0, height_ = 0, channels_ = 0;
  std::vector<double> data_;
};

/// Boolean per-pixel mask stored as bytes.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill = false)
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  bool operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool value) { data_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0; }
  bool operator[](std::size_t i) const { return data_[i] != 0; }
  void set(std::size_t i, bool value) { data_[i] = value ? 1 : 0; }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
  }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int width_ = 0, height_ = 0;
  std::vector<std::uint8_t> data_;
};

// -----------------------------------------------------------------------------
// Threading
// -----------------------------------------------------------------------------

/// Worker count from FLEXPAINT_THREADS, else hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("FLEXPAINT_THREADS")) {
    auto n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [begin, end) split into contiguous chunks. The body
/// must only write to state owned by index i so results do not depend on the
/// thread count.
template <class Body>
void parallel_for(int begin, int end, Body&& body) {
  const int n = end - begin;
  if (n <= 0) return;
  const int workers = static_cast<int>(std::min<unsigned>(thread_count(), static_cast<unsigned>(n)));
  if (workers <= 1 || n < 16) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + w * chunk;
    const int hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace flexpaint
