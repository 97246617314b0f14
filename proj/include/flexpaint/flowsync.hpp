// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>

#include "flexpaint/fusion.hpp"

namespace flexpaint {

// -----------------------------------------------------------------------------
// Elementwise flow arithmetic
// -----------------------------------------------------------------------------

/// Clean-sample prediction on the straight path: x - t v.
inline Tensor predict_x0(const Tensor& x, const Tensor& v, double t) {
  require(x.same_shape(v), "predict_x0: state and velocity shapes differ");
  require(t >= 0 && t <= 1, "predict_x0: timestep outside [0,1]");
  if (t == 0) return x;
  Tensor out(x.width(), x.height(), x.channels());
  for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = x.data()[i] - t * v.data()[i];
  return out;
}

/// Classifier-free guidance: v_neg + s (v_cond - v_neg). Scale 1 returns
/// v_cond untouched rather than up to rounding.
inline Tensor cfg_velocity(const Tensor& v_cond, const Tensor& v_neg, double scale) {
  require(v_cond.same_shape(v_neg), "cfg_velocity: velocity shapes differ");
  if (scale == 1.0) return v_cond;
  Tensor out(v_cond.width(), v_cond.height(), v_cond.channels());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = v_neg.data()[i] + scale * (v_cond.data()[i] - v_neg.data()[i]);
  return out;
}

/// Velocity that lands on the synchronized clean sample: (x - x0_sync) / t.
inline Tensor sync_velocity(const Tensor& x, const Tensor& x0_sync, double t) {
  require(x.same_shape(x0_sync), "sync_velocity: shapes differ");
  require(t > 0, "sync_velocity: timestep must be positive");
  Tensor out(x.width(), x.height(), x.channels());
  for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = (x.data()[i] - x0_sync.data()[i]) / t;
  return out;
}

// -----------------------------------------------------------------------------
// View synchronization
// -----------------------------------------------------------------------------

enum class WeightingMode { cosine, adaptive };

struct SyncConfig {
  bool enabled = true;
  WeightingMode weighting = WeightingMode::cosine;
  double cosine_beta = 1.0;
  WeighterParams adaptive;
  int interval = 1;   // sync every k-th step
  double t_lo = 0.0;  // sync only while t_lo <= t <= t_hi
  double t_hi = 1.0;

  bool active(int step, double t) const { return enabled && step % interval == 0 && t >= t_lo && t <= t_hi; }
};

inline void validate_sync(const SyncConfig& s) {
  require(s.interval >= 1, "sync interval must be at least 1");
  require(0 <= s.t_lo && s.t_lo <= s.t_hi && s.t_hi <= 1, "sync window must satisfy 0 <= t_lo <= t_hi <= 1");
  if (s.weighting == WeightingMode::adaptive) validate_params(s.adaptive);
}

/// Geometry shared by every synchronization step of one sampling run:
/// per-view z-buffer renders and texel-to-pixel projections.
class SyncContext {
 public:
  SyncContext(const TriMesh& mesh, const CameraRig& rig, const UvAtlasMaps& atlas, GridLayout layout = {2, 2},
              ReprojectOptions options = {})
      : mesh_(&mesh), rig_(&rig), atlas_(&atlas), layout_(layout) {
    require(rig.size() == layout.capacity(), "rig view count does not match grid layout");
    require(atlas.triangle_count == mesh.triangle_count(), "atlas was not baked from this mesh (triangle counts differ)");
    geometry_ = render_geometry(mesh, rig);
    projections_ = build_rig_projections(rig, mesh, atlas, geometry_, options);
  }

  const TriMesh& mesh() const { return *mesh_; }
  const CameraRig& rig() const { return *rig_; }
  const UvAtlasMaps& atlas() const { return *atlas_; }
  GridLayout layout() const { return layout_; }
  const std::vector<RenderOutputs>& geometry() const { return geometry_; }
  const std::vector<ViewProjection>& projections() const { return projections_; }
  int tile_width() const { return rig_->cameras[0].width; }
  int tile_height() const { return rig_->cameras[0].height; }

 private:
  const TriMesh* mesh_;
  const CameraRig* rig_;
  const UvAtlasMaps* atlas_;
  GridLayout layout_;
  std::vector<RenderOutputs> geometry_;
  std::vector<ViewProjection> projections_;
};

inline WeightField compute_weights(const std::vector<PartialTexture>& partials, const UvAtlasMaps& atlas,
                                   const SyncConfig& sync, double t) {
  return sync.weighting == WeightingMode::cosine ? cosine_weights(partials, sync.cosine_beta)
                                                 : weighter_score(partials, atlas, t, sync.adaptive);
}

struct SyncResult {
  Tensor x0;
  TextureMap fused;
  std::vector<PartialTexture> partials;
};

/// decode -> split -> reproject -> weight -> fuse -> re-render -> assemble ->
/// encode. Pixels that are foreground and whose nearest texel is valid in the
/// fused texture take the re-rendered color; all other pixels keep the
/// decoded value.
inline SyncResult sync_x0(const Tensor& x0, const SyncContext& ctx, const Codec& codec, const SyncConfig& sync,
                          double t) {
  const Image decoded = codec.decode(x0);
  require(decoded.width() == ctx.tile_width() * ctx.layout().cols &&
              decoded.height() == ctx.tile_height() * ctx.layout().rows,
          "decoded grid does not match rig resolution and layout");
  GridImage grid = GridImage::split(decoded, ctx.layout());
  SyncResult out;
  out.partials = reproject_grid(grid, ctx.projections());
  out.fused = fuse(out.partials, compute_weights(out.partials, ctx.atlas(), sync, t));
  for (int v = 0; v < grid.view_count(); ++v) {
    RenderOutputs r = ctx.geometry()[v];
    shade(r, out.fused, Sampling::nearest);
    auto& tile = grid.tiles[v];
    for (std::size_t p = 0; p < r.coverage.size(); ++p) {
      if (!r.coverage[p] || !r.texel_valid[p]) continue;
      for (int c = 0; c < 3; ++c) tile.data()[3 * p + c] = r.color.data()[3 * p + c];
    }
  }
  out.x0 = codec.encode(grid.assemble());
  return out;
}

inline SyncResult sync_x0(const Tensor& x0, const TriMesh& mesh, const CameraRig& rig, const UvAtlasMaps& atlas,
                          const Codec& codec, const SyncConfig& sync, double t) {
  return sync_x0(x0, SyncContext(mesh, rig, atlas, default_layout(rig.size())), codec, sync, t);
}

// -----------------------------------------------------------------------------
// Sampler
// -----------------------------------------------------------------------------

struct SamplerConfig {
  int steps = 30;
  double cfg_scale = 2.0;        // explicit guidance
  double distilled_scale = 6.0;  // forwarded to the model
  std::uint64_t seed = 0;
  SyncConfig sync;
};

/// Observed state of one Euler step, passed to the step callback before the
/// update is applied.
struct StepRecord {
  int step = 0;
  double t = 0;
  bool synced = false;
  const Tensor* x = nullptr;
  const Tensor* x0 = nullptr;         // prediction from the guided velocity
  const Tensor* x0_synced = nullptr;  // only when synced
  const TextureMap* fused = nullptr;  // only when synced
};

struct SampleResult {
  GridImage final_grid;
  TextureMap fused;
  Tensor final_state;
  int synced_steps = 0;
};

/// Euler integration of the guided velocity from t=1 (seeded gaussian) to
/// t=0 on the uniform grid t_k = 1 - k/steps, with view synchronization on
/// the steps selected by the sync config.
inline SampleResult sample(const VelocityModel& model, const ConditionBundle& condition, const SyncContext& ctx,
                           const Codec& codec, const SamplerConfig& config,
                           const std::function<void(const StepRecord&)>& on_step = {}) {
  require(config.steps >= 1, "sampler needs at least one step");
  validate_sync(config.sync);
  const auto depth = render_depth_grid(ctx.mesh(), ctx.rig(), ctx.layout());
  const Image blank(ctx.tile_width() * ctx.layout().cols, ctx.tile_height() * ctx.layout().rows, 3);
  const Tensor shape = codec.encode(blank);
  Tensor x = gaussian_tensor(shape.width(), shape.height(), shape.channels(), config.seed);

  SampleResult result;
  bool have_fused = false;
  const double dt = 1.0 / config.steps;
  for (int k = 0; k < config.steps; ++k) {
    const double t = 1.0 - static_cast<double>(k) / config.steps;
    const Tensor v_cond = model.velocity(x, t, {&condition, false, config.distilled_scale}, depth);
    const Tensor v_neg = model.velocity(x, t, {&condition, true, config.distilled_scale}, depth);
    Tensor v = cfg_velocity(v_cond, v_neg, config.cfg_scale);
    StepRecord rec{k, t, false, &x, nullptr, nullptr, nullptr};
    const Tensor x0 = predict_x0(x, v, t);
    rec.x0 = &x0;
    std::optional<SyncResult> synced;
    if (config.sync.active(k, t)) {
      synced = sync_x0(x0, ctx, codec, config.sync, t);
      v = sync_velocity(x, synced->x0, t);
      rec.synced = true;
      rec.x0_synced = &synced->x0;
      rec.fused = &synced->fused;
      ++result.synced_steps;
    }
    if (on_step) on_step(rec);
    if (synced) {
      result.fused = std::move(synced->fused);
      have_fused = true;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      x.data()[i] -= dt * v.data()[i];
      if (!std::isfinite(x.data()[i])) throw Error("non-finite sampler state at step " + std::to_string(k));
    }
  }

  result.final_state = x;
  result.final_grid = GridImage::split(codec.decode(x), ctx.layout());
  if (!have_fused) {
    const auto partials = reproject_grid(result.final_grid, ctx.projections());
    result.fused = fuse(partials, compute_weights(partials, ctx.atlas(), config.sync, 0.0));
  }
  return result;
}

}  // namespace flexpaint
