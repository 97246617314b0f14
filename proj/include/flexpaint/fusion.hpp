// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

#include "flexpaint/reproject.hpp"
#include "flexpaint/velocity.hpp"

namespace flexpaint {

// -----------------------------------------------------------------------------
// Weights
// -----------------------------------------------------------------------------

/// Per-view, per-texel blending weights. On texels covered by at least one
/// view the weights of covering views sum to 1; non-covering views get 0.
struct WeightField {
  int views = 0;
  int resolution = 0;
  std::vector<double> weights;  // views x resolution^2, view-major

  WeightField() = default;
  WeightField(int v, int res)
      : views(v), resolution(res), weights(static_cast<std::size_t>(v) * res * res, 0.0) {}

  std::size_t texel_count() const { return static_cast<std::size_t>(resolution) * resolution; }
  double& at(int view, std::size_t texel) { return weights[view * texel_count() + texel]; }
  double at(int view, std::size_t texel) const { return weights[view * texel_count() + texel]; }
};

namespace detail {

inline void check_partials(const std::vector<PartialTexture>& partials) {
  require(!partials.empty(), "no partial textures given");
  const int res = partials[0].resolution();
  for (const auto& p : partials) require(p.resolution() == res, "partial textures differ in resolution");
}

}  // namespace detail

/// w_v proportional to max(0, view_cos_v)^beta over covering views.
inline WeightField cosine_weights(const std::vector<PartialTexture>& partials, double beta) {
  detail::check_partials(partials);
  require(std::isfinite(beta) && beta >= 0, "cosine exponent must be finite and non-negative");
  const int V = static_cast<int>(partials.size());
  WeightField w(V, partials[0].resolution());
  for (std::size_t t = 0; t < w.texel_count(); ++t) {
    double sum = 0;
    for (int v = 0; v < V; ++v) {
      if (!partials[v].covered[t]) continue;
      w.at(v, t) = std::pow(std::max(0.0, partials[v].view_cos.data()[t]), beta);
      sum += w.at(v, t);
    }
    if (sum > 0) {
      for (int v = 0; v < V; ++v) w.at(v, t) /= sum;
    } else {
      int n = 0;
      for (int v = 0; v < V; ++v) n += partials[v].covered[t];
      for (int v = 0; v < V; ++v) w.at(v, t) = partials[v].covered[t] ? 1.0 / n : 0.0;
    }
  }
  return w;
}

/// Parametric stand-in for a learned weighting network.
struct WeighterParams {
  double beta = 1.0;         // cosine exponent, >= 0
  double lambda_edge = 0.0;  // depth-edge penalty, >= 0
  double lambda_t = 0.0;     // timestep modulation of the exponent
  double temperature = 1.0;  // softmax temperature, > 0

  friend bool operator==(const WeighterParams&, const WeighterParams&) = default;
};

inline void validate_params(const WeighterParams& p) {
  require(std::isfinite(p.beta) && std::isfinite(p.lambda_edge) && std::isfinite(p.lambda_t) &&
              std::isfinite(p.temperature),
          "weighter parameters must be finite");
  require(p.temperature > 0, "weighter temperature must be positive");
  require(p.beta >= 0 && p.lambda_edge >= 0, "beta and lambda_edge must be non-negative");
}

inline constexpr double kCosineFloor = 1e-6;

/// Softmax over covering views of
///   ((beta + lambda_t * t) * log(max(eps, view_cos)) - lambda_edge * depth_edge) / temperature.
/// The atlas supplies the position map; this parametric form does not use it
/// beyond a resolution check.
inline WeightField weighter_score(const std::vector<PartialTexture>& partials, const UvAtlasMaps& atlas, double t,
                                  const WeighterParams& params) {
  detail::check_partials(partials);
  validate_params(params);
  require(t >= 0 && t <= 1, "timestep must lie in [0,1]");
  require(atlas.resolution == partials[0].resolution(), "atlas and partial resolutions differ");
  const int V = static_cast<int>(partials.size());
  WeightField w(V, partials[0].resolution());
  const double exponent = params.beta + params.lambda_t * t;
  std::vector<double> logit(V);
  for (std::size_t tx = 0; tx < w.texel_count(); ++tx) {
    double top = -std::numeric_limits<double>::infinity();
    for (int v = 0; v < V; ++v) {
      if (!partials[v].covered[tx]) continue;
      const double c = std::max(kCosineFloor, partials[v].view_cos.data()[tx]);
      logit[v] = (exponent * std::log(c) - params.lambda_edge * partials[v].depth_edge.data()[tx]) / params.temperature;
      top = std::max(top, logit[v]);
    }
    if (!std::isfinite(top)) continue;
    double sum = 0;
    for (int v = 0; v < V; ++v)
      if (partials[v].covered[tx]) sum += (w.at(v, tx) = std::exp(logit[v] - top));
    for (int v = 0; v < V; ++v) w.at(v, tx) /= sum;
  }
  return w;
}

/// Per-texel convex combination of covering views; validity is the union of
/// coverage. Accumulated as offsets from the first covering view so texels
/// where all views agree come out bit-exact; a weight of exactly 1 copies
/// that view.
inline TextureMap fuse(const std::vector<PartialTexture>& partials, const WeightField& weights) {
  detail::check_partials(partials);
  require(weights.views == static_cast<int>(partials.size()), "weight field view count does not match partials");
  require(weights.resolution == partials[0].resolution(), "weight field resolution does not match partials");
  const int V = weights.views;
  TextureMap out(weights.resolution);
  for (std::size_t t = 0; t < weights.texel_count(); ++t) {
    int first = -1;
    for (int v = 0; v < V && first < 0; ++v)
      if (partials[v].covered[t]) first = v;
    if (first < 0) continue;
    const double* base = &partials[first].colors.data()[3 * t];
    Color d{0, 0, 0};
    for (int v = first + 1; v < V; ++v) {
      if (!partials[v].covered[t]) continue;
      const double w = weights.at(v, t);
      for (int k = 0; k < 3; ++k) d[k] += w * (partials[v].colors.data()[3 * t + k] - base[k]);
    }
    Color c{base[0] + d[0], base[1] + d[1], base[2] + d[2]};
    for (int v = first; v < V; ++v)
      if (partials[v].covered[t] && weights.at(v, t) == 1.0)
        for (int k = 0; k < 3; ++k) c[k] = partials[v].colors.data()[3 * t + k];
    out.validity.set(t, true);
    out.set_color(t, c);
  }
  return out;
}

inline TextureMap as_texture(const PartialTexture& partial) {
  TextureMap tex;
  tex.colors = partial.colors;
  tex.validity = partial.covered;
  tex.margin = Mask(partial.resolution(), partial.resolution());
  return tex;
}

/// Mean over texels seen by two or more views of the largest per-channel
/// color spread across those views. Returns 0 when no texel is shared.
inline double cross_view_disagreement(const std::vector<PartialTexture>& partials, std::size_t* shared_texels = nullptr) {
  detail::check_partials(partials);
  double total = 0;
  std::size_t shared = 0;
  for (std::size_t t = 0; t < partials[0].texel_count(); ++t) {
    Color lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    int n = 0;
    for (const auto& p : partials) {
      if (!p.covered[t]) continue;
      ++n;
      for (int k = 0; k < 3; ++k) {
        lo[k] = std::min(lo[k], p.colors.data()[3 * t + k]);
        hi[k] = std::max(hi[k], p.colors.data()[3 * t + k]);
      }
    }
    if (n < 2) continue;
    total += std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});
    ++shared;
  }
  if (shared_texels) *shared_texels = shared;
  return shared ? total / shared : 0.0;
}

// -----------------------------------------------------------------------------
// Losses
// -----------------------------------------------------------------------------

/// Image transform applied before the reconstruction loss. It must keep the
/// width and height of its input.
using FeatureTransform = std::function<Image(const Image&)>;

inline Image identity_feature(const Image& image) { return image; }

struct LossWeights {
  double perceptual = 1.0;
  double cycle = 0.5;
  double smooth = 0.2;
  double alpha_decay = 1.0;  // alpha in exp(-alpha * t)
};

struct LossBreakdown {
  double perceptual = 0;
  double cycle = 0;
  double smooth = 0;
  double total = 0;
};

/// Sum of squared forward differences along x and y, averaged over channels
/// and divided by the pixel count.
inline double loss_smooth(const Image& image) {
  require(image.width() >= 2 && image.height() >= 2, "smoothness loss needs at least 2x2 pixels");
  const int W = image.width(), H = image.height(), C = image.channels();
  double sum = 0;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < C; ++c) {
        const double v = image.at(x, y, c);
        if (x + 1 < W) sum += (image.at(x + 1, y, c) - v) * (image.at(x + 1, y, c) - v);
        if (y + 1 < H) sum += (image.at(x, y + 1, c) - v) * (image.at(x, y + 1, c) - v);
      }
  return sum / (static_cast<double>(C) * W * H);
}

namespace detail {

inline std::vector<RenderOutputs> shade_all(const std::vector<RenderOutputs>& geometry, const TextureMap& texture) {
  std::vector<RenderOutputs> out = geometry;
  for (auto& r : out) shade(r, texture, Sampling::nearest);
  return out;
}

inline double mean_abs_channels(const double* a, const double* b, int channels) {
  double s = 0;
  for (int c = 0; c < channels; ++c) s += std::abs(a[c] - b[c]);
  return s / channels;
}

inline double cycle_from_renders(const std::vector<std::vector<RenderOutputs>>& partial_renders,
                                 const std::vector<RenderOutputs>& fused_renders) {
  double total = 0;
  std::size_t count = 0;
  for (std::size_t v = 0; v < fused_renders.size(); ++v) {
    const auto& a = partial_renders[v][v];
    const auto& b = fused_renders[v];
    for (std::size_t p = 0; p < a.coverage.size(); ++p) {
      if (!a.coverage[p] || !a.texel_valid[p]) continue;
      total += mean_abs_channels(&a.color.data()[3 * p], &b.color.data()[3 * p], 3);
      ++count;
    }
  }
  return count ? total / count : 0.0;
}

inline double recon_from_renders(const std::vector<RenderOutputs>& gt_renders,
                                 const std::vector<RenderOutputs>& fused_renders, double t, const LossWeights& w,
                                 const FeatureTransform& feature) {
  double total = 0;
  std::size_t count = 0;
  for (std::size_t v = 0; v < gt_renders.size(); ++v) {
    const auto& g = gt_renders[v];
    const auto& f = fused_renders[v];
    const Image fg = feature ? feature(g.color) : g.color;
    const Image ff = feature ? feature(f.color) : f.color;
    require(fg.width() == g.width && fg.height() == g.height && ff.same_shape(fg),
            "feature transform must preserve image width and height");
    for (std::size_t p = 0; p < g.coverage.size(); ++p) {
      if (!g.coverage[p] || !g.texel_valid[p] || !f.texel_valid[p]) continue;
      total += mean_abs_channels(&fg.data()[p * fg.channels()], &ff.data()[p * ff.channels()], fg.channels());
      ++count;
    }
  }
  return count ? std::exp(-w.alpha_decay * t) * total / count : 0.0;
}

inline double smooth_from_renders(const std::vector<RenderOutputs>& fused_renders) {
  double s = 0;
  for (const auto& r : fused_renders) s += loss_smooth(r.color);
  return fused_renders.empty() ? 0.0 : s / fused_renders.size();
}

}  // namespace detail

/// Mean per-pixel L1 between each partial's render and the fused texture's
/// render from the same camera, over pixels whose texel the partial covers.
inline double loss_cycle(const std::vector<PartialTexture>& partials, const TextureMap& fused,
                         const std::vector<RenderOutputs>& geometry) {
  detail::check_partials(partials);
  require(partials.size() == geometry.size(), "partial count does not match rig size");
  std::vector<std::vector<RenderOutputs>> pr;
  for (std::size_t v = 0; v < partials.size(); ++v) {
    std::vector<RenderOutputs> one(geometry.size());
    one[v] = geometry[v];
    shade(one[v], as_texture(partials[v]), Sampling::nearest);
    pr.push_back(std::move(one));
  }
  return detail::cycle_from_renders(pr, detail::shade_all(geometry, fused));
}

inline double loss_cycle(const std::vector<PartialTexture>& partials, const TextureMap& fused, const TriMesh& mesh,
                         const CameraRig& rig) {
  return loss_cycle(partials, fused, render_geometry(mesh, rig));
}

/// exp(-alpha t) times the mean per-pixel L1 between feature(render(GT)) and
/// feature(render(fused)) over foreground pixels where both textures are
/// valid.
inline double loss_recon(const TextureMap& fused, const TextureMap& ground_truth,
                         const std::vector<RenderOutputs>& geometry, double t, const LossWeights& weights = {},
                         const FeatureTransform& feature = identity_feature) {
  require(fused.resolution() == ground_truth.resolution(), "fused and ground-truth textures differ in resolution");
  return detail::recon_from_renders(detail::shade_all(geometry, ground_truth), detail::shade_all(geometry, fused), t,
                                    weights, feature);
}

inline double loss_recon(const TextureMap& fused, const TextureMap& ground_truth, const TriMesh& mesh,
                         const CameraRig& rig, double t, const LossWeights& weights = {},
                         const FeatureTransform& feature = identity_feature) {
  return loss_recon(fused, ground_truth, render_geometry(mesh, rig), t, weights, feature);
}

/// lambda_pec * L_pec + lambda_cyc * L_cyc + lambda_sm * L_sm, with the
/// smoothness term averaged over the fused texture's renders.
inline LossBreakdown total_weighter_loss(const std::vector<PartialTexture>& partials, const TextureMap& fused,
                                         const TextureMap& ground_truth, const std::vector<RenderOutputs>& geometry,
                                         double t, const LossWeights& weights = {},
                                         const FeatureTransform& feature = identity_feature) {
  LossBreakdown out;
  const auto fused_renders = detail::shade_all(geometry, fused);
  out.perceptual = detail::recon_from_renders(detail::shade_all(geometry, ground_truth), fused_renders, t, weights, feature);
  out.cycle = loss_cycle(partials, fused, geometry);
  out.smooth = detail::smooth_from_renders(fused_renders);
  out.total = weights.perceptual * out.perceptual + weights.cycle * out.cycle + weights.smooth * out.smooth;
  return out;
}

// -----------------------------------------------------------------------------
// Training-pair simulation
// -----------------------------------------------------------------------------

struct SimulationOptions {
  double bias_sigma = 0.1;
  double noise_sigma = 0.05;
};

/// Renders the ground truth, noises it to x_t = (1-t) g + t eps, predicts x0
/// with `model` (a NoisyOracleVelocity on g when null) and reprojects each
/// predicted view.
inline std::vector<PartialTexture> simulate_noisy_partials(const TextureMap& ground_truth,
                                                           const std::vector<RenderOutputs>& geometry,
                                                           const std::vector<ViewProjection>& projections,
                                                           GridLayout layout, double t, std::uint64_t seed,
                                                           const VelocityModel* model = nullptr,
                                                           SimulationOptions options = {}) {
  require(t > 0 && t <= 1, "simulation timestep must lie in (0,1]");
  const Image g = render_views(ground_truth, geometry, layout).assemble();
  const Tensor eps = gaussian_tensor(g.width(), g.height(), g.channels(), seed);
  Tensor xt(g.width(), g.height(), g.channels());
  for (std::size_t i = 0; i < g.size(); ++i) xt.data()[i] = (1 - t) * g.data()[i] + t * eps.data()[i];
  NoisyOracleVelocity fallback(g, layout, {options.bias_sigma, options.noise_sigma, seed ^ 0xB1A5ull});
  const VelocityModel& m = model ? *model : fallback;
  const Tensor v = m.velocity(xt, t, {}, GridImage{});
  Tensor x0(g.width(), g.height(), g.channels());
  for (std::size_t i = 0; i < g.size(); ++i) x0.data()[i] = xt.data()[i] - t * v.data()[i];
  return reproject_grid(GridImage::split(x0, layout), projections);
}

// -----------------------------------------------------------------------------
// Weighter fitting
// -----------------------------------------------------------------------------

struct WeighterSample {
  std::vector<PartialTexture> partials;
  TextureMap ground_truth;
  double t = 0.5;
};

/// Mean total_weighter_loss of a parameter setting over a fixed dataset.
/// Ground-truth and partial renders are cached at construction.
class WeighterObjective {
 public:
  WeighterObjective(const std::vector<WeighterSample>& dataset, const UvAtlasMaps& atlas,
                    const std::vector<RenderOutputs>& geometry, LossWeights weights = {},
                    FeatureTransform feature = identity_feature)
      : dataset_(dataset), atlas_(atlas), geometry_(geometry), weights_(weights), feature_(std::move(feature)) {
    require(!dataset.empty(), "weighter dataset is empty");
    for (const auto& s : dataset) {
      require(s.partials.size() == geometry.size(), "sample partial count does not match rig size");
      gt_renders_.push_back(detail::shade_all(geometry, s.ground_truth));
      std::vector<std::vector<RenderOutputs>> pr;
      for (std::size_t v = 0; v < s.partials.size(); ++v) {
        std::vector<RenderOutputs> one(geometry.size());
        one[v] = geometry[v];
        shade(one[v], as_texture(s.partials[v]), Sampling::nearest);
        pr.push_back(std::move(one));
      }
      partial_renders_.push_back(std::move(pr));
    }
  }

  LossBreakdown breakdown(const WeighterParams& params) const {
    std::vector<LossBreakdown> per(dataset_.size());
    parallel_for(0, static_cast<int>(dataset_.size()), [&](int i) {
      const auto& s = dataset_[i];
      const auto fused = fuse(s.partials, weighter_score(s.partials, atlas_, s.t, params));
      const auto fr = detail::shade_all(geometry_, fused);
      auto& b = per[i];
      b.perceptual = detail::recon_from_renders(gt_renders_[i], fr, s.t, weights_, feature_);
      b.cycle = detail::cycle_from_renders(partial_renders_[i], fr);
      b.smooth = detail::smooth_from_renders(fr);
      b.total = weights_.perceptual * b.perceptual + weights_.cycle * b.cycle + weights_.smooth * b.smooth;
    });
    LossBreakdown mean;
    for (const auto& b : per) {
      mean.perceptual += b.perceptual / per.size();
      mean.cycle += b.cycle / per.size();
      mean.smooth += b.smooth / per.size();
      mean.total += b.total / per.size();
    }
    return mean;
  }

  double operator()(const WeighterParams& params) const { return breakdown(params).total; }

 private:
  const std::vector<WeighterSample>& dataset_;
  const UvAtlasMaps& atlas_;
  const std::vector<RenderOutputs>& geometry_;
  LossWeights weights_;
  FeatureTransform feature_;
  std::vector<std::vector<RenderOutputs>> gt_renders_;
  std::vector<std::vector<std::vector<RenderOutputs>>> partial_renders_;
};

struct FitResult {
  WeighterParams params;
  double loss = 0;
  std::vector<double> trace;  // best loss after each evaluation
  int evaluations = 0;
};

/// Compass search over (beta, lambda_edge, lambda_t, log temperature).
/// Each accepted move strictly lowers the loss; a sweep without improvement
/// halves the step. Stops after `budget` evaluations.
inline FitResult fit_weighter(const WeighterObjective& objective, WeighterParams init, int budget,
                              double initial_step = 0.5) {
  require(budget >= 1, "fitting budget must be at least one evaluation");
  validate_params(init);
  auto to_params = [](const std::array<double, 4>& x) {
    return WeighterParams{x[0], x[1], x[2], std::exp(x[3])};
  };
  std::array<double, 4> x = {init.beta, init.lambda_edge, init.lambda_t, std::log(init.temperature)};
  std::array<double, 4> step;
  step.fill(initial_step);

  FitResult result;
  result.params = init;
  result.loss = objective(init);
  result.evaluations = 1;
  result.trace.push_back(result.loss);

  while (result.evaluations < budget && *std::max_element(step.begin(), step.end()) > 1e-4) {
    bool improved = false;
    for (int d = 0; d < 4 && result.evaluations < budget; ++d) {
      for (double sign : {1.0, -1.0}) {
        if (result.evaluations >= budget) break;
        auto cand = x;
        cand[d] += sign * step[d];
        cand[0] = std::max(0.0, cand[0]);
        cand[1] = std::max(0.0, cand[1]);
        if (cand == x) continue;
        const auto params = to_params(cand);
        const double loss = objective(params);
        ++result.evaluations;
        if (loss < result.loss) {
          result.loss = loss;
          result.params = params;
          x = cand;
          improved = true;
          step[d] *= 2;
        }
        result.trace.push_back(result.loss);
        if (improved && x == cand) break;
      }
    }
    if (!improved)
      for (auto& s : step) s *= 0.5;
  }
  return result;
}

}  // namespace flexpaint
