// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstring>
#include <random>

#include "flexpaint/embed.hpp"
#include "flexpaint/grid.hpp"

namespace flexpaint {

/// Sampler tensor: a grid-shaped image in latent (or pixel) space.
using Tensor = Image;

/// What a velocity model is conditioned on for one evaluation. `negative`
/// selects the CFG negative embedding instead of the positive slots.
struct ModelCondition {
  const ConditionBundle* bundle = nullptr;
  bool negative = false;
  double distilled_scale = 6.0;  // opaque to the sampler, forwarded to the model
};

/// Velocity field v(x, t | condition, depth). Implementations must be
/// deterministic functions of their inputs.
class VelocityModel {
 public:
  virtual ~VelocityModel() = default;
  virtual Tensor velocity(const Tensor& x, double t, const ModelCondition& condition, const GridImage& depth) const = 0;
};

/// Velocity of the straight path ending at `target`: (x - target) / t.
class OracleVelocity : public VelocityModel {
 public:
  explicit OracleVelocity(Tensor target) : target_(std::move(target)) {}

  Tensor velocity(const Tensor& x, double t, const ModelCondition&, const GridImage&) const override {
    require(x.same_shape(target_), "oracle target shape does not match state");
    Tensor v(x.width(), x.height(), x.channels());
    if (t <= 0) return v;
    for (std::size_t i = 0; i < x.size(); ++i) v.data()[i] = (x.data()[i] - target_.data()[i]) / t;
    return v;
  }

  const Tensor& target() const { return target_; }

 private:
  Tensor target_;
};

struct NoisyOracleOptions {
  double bias_sigma = 0.1;   // per-view, per-channel constant offset
  double noise_sigma = 0.0;  // per-element white noise
  std::uint64_t seed = 0;
};

/// Oracle plus a seeded constant color bias per grid tile and white noise.
/// The predicted clean sample x - t*v is then off by -t*(bias + noise), so
/// views disagree by an amount proportional to t.
class NoisyOracleVelocity : public VelocityModel {
 public:
  NoisyOracleVelocity(Tensor target, GridLayout layout, NoisyOracleOptions options = {})
      : oracle_(std::move(target)), layout_(layout), options_(options) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    bias_.resize(static_cast<std::size_t>(layout.capacity()) * 3);
    for (auto& b : bias_) b = options.bias_sigma * normal(rng);
  }

  Tensor velocity(const Tensor& x, double t, const ModelCondition& cond, const GridImage& depth) const override {
    Tensor v = oracle_.velocity(x, t, cond, depth);
    require(x.channels() == 3, "noisy oracle expects an RGB state");
    const int tw = x.width() / layout_.cols, th = x.height() / layout_.rows;
    std::uint64_t tbits;
    std::memcpy(&tbits, &t, sizeof t);
    std::mt19937_64 rng(options_.seed ^ (tbits * 0x9E3779B97F4A7C15ull));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int y = 0; y < x.height(); ++y)
      for (int xx = 0; xx < x.width(); ++xx) {
        const int view = (y / th) * layout_.cols + xx / tw;
        for (int c = 0; c < 3; ++c) {
          double n = options_.noise_sigma > 0 ? options_.noise_sigma * normal(rng) : 0.0;
          v.at(xx, y, c) += bias_[3 * view + c] + n;
        }
      }
    return v;
  }

  const std::vector<double>& bias() const { return bias_; }

 private:
  OracleVelocity oracle_;
  GridLayout layout_;
  NoisyOracleOptions options_;
  std::vector<double> bias_;
};

/// Seeded unit gaussian tensor.
inline Tensor gaussian_tensor(int width, int height, int channels, std::uint64_t seed) {
  Tensor out(width, height, channels);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : out.data()) v = normal(rng);
  return out;
}

// -----------------------------------------------------------------------------
// Codec
// -----------------------------------------------------------------------------

/// Image <-> latent mapping used around the sampler. The default is the
/// identity on pixel space.
class Codec {
 public:
  virtual ~Codec() = default;
  virtual Tensor encode(const Image& images) const = 0;
  virtual Image decode(const Tensor& latent) const = 0;
};

class IdentityCodec : public Codec {
 public:
  Tensor encode(const Image& images) const override { return images; }
  Image decode(const Tensor& latent) const override { return latent; }
};

}  // namespace flexpaint
