// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "flexpaint/flowsync.hpp"

namespace fp = flexpaint;

namespace {

fp::Tensor random_tensor(int w, int h, std::uint64_t seed) { return fp::gaussian_tensor(w, h, 3, seed); }

double max_abs_diff(const fp::Tensor& a, const fp::Tensor& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

/// Returns a fixed tensor and records what it was asked.
class SpyModel : public fp::VelocityModel {
 public:
  explicit SpyModel(fp::Tensor v) : v_(std::move(v)) {}
  fp::Tensor velocity(const fp::Tensor&, double t, const fp::ModelCondition& c, const fp::GridImage& depth) const override {
    calls.push_back({t, c.negative, c.distilled_scale, depth.view_count()});
    return v_;
  }
  struct Call {
    double t;
    bool negative;
    double distilled;
    int depth_views;
  };
  mutable std::vector<Call> calls;

 private:
  fp::Tensor v_;
};

struct SyncFixture {
  fp::fixture::Scene scene{fp::make_icosphere(), 32, 32};
  fp::SyncContext ctx{scene.mesh, scene.rig, scene.atlas};
  fp::IdentityCodec codec;
  fp::ConditionBundle bundle = fp::aggregate(fp::embed_text("x"), {});
};

}  // namespace

TEST(FlowMath, PredictX0) {
  const auto x = random_tensor(5, 4, 1), v = random_tensor(5, 4, 2), zero = fp::Tensor(5, 4, 3);
  EXPECT_EQ(fp::predict_x0(x, zero, 0.7), x);
  EXPECT_EQ(fp::predict_x0(x, v, 0.0), x);
  const auto p = fp::predict_x0(x, v, 0.3);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(p.data()[i], x.data()[i] - 0.3 * v.data()[i]);
  // point on the straight path with the oracle velocity lands on the target
  const auto g = random_tensor(5, 4, 3), eps = random_tensor(5, 4, 4);
  for (double t : {0.05, 0.5, 1.0}) {
    fp::Tensor xt(5, 4, 3);
    for (std::size_t i = 0; i < xt.size(); ++i) xt.data()[i] = (1 - t) * g.data()[i] + t * eps.data()[i];
    const auto vt = fp::OracleVelocity(g).velocity(xt, t, {}, {});
    EXPECT_LT(max_abs_diff(fp::predict_x0(xt, vt, t), g), 1e-14);
  }
  EXPECT_THROW(fp::predict_x0(x, fp::Tensor(4, 4, 3), 0.5), fp::Error);
  EXPECT_THROW(fp::predict_x0(x, v, 1.5), fp::Error);
}

TEST(FlowMath, CfgVelocity) {
  const auto c = random_tensor(6, 3, 5), n = random_tensor(6, 3, 6);
  EXPECT_EQ(fp::cfg_velocity(c, n, 1.0), c);
  for (double s : {0.0, 2.0, 6.0, -3.5}) EXPECT_EQ(fp::cfg_velocity(c, c, s), c);
  EXPECT_EQ(fp::cfg_velocity(fp::Tensor(2, 2, 3, 1.0), fp::Tensor(2, 2, 3, 0.0), 2.0), fp::Tensor(2, 2, 3, 2.0));
  const auto g = fp::cfg_velocity(c, n, 2.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g.data()[i], n.data()[i] + 2.0 * (c.data()[i] - n.data()[i]));
  EXPECT_THROW(fp::cfg_velocity(c, fp::Tensor(6, 3, 1), 2.0), fp::Error);
}

TEST(FlowMath, SyncVelocity) {
  const auto x = random_tensor(4, 4, 7), v = random_tensor(4, 4, 8), x0 = random_tensor(4, 4, 9);
  EXPECT_EQ(fp::sync_velocity(x, x, 0.4), fp::Tensor(4, 4, 3));
  EXPECT_LT(max_abs_diff(fp::sync_velocity(x, fp::predict_x0(x, v, 0.35), 0.35), v), 1e-14);
  const auto s = fp::sync_velocity(x, x0, 0.5);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s.data()[i], (x.data()[i] - x0.data()[i]) / 0.5);
  EXPECT_THROW(fp::sync_velocity(x, x0, 0.0), fp::Error);
}

TEST(SyncConfig, Validation) {
  fp::SyncConfig s;
  EXPECT_NO_THROW(fp::validate_sync(s));
  s.interval = 0;
  EXPECT_THROW(fp::validate_sync(s), fp::Error);
  s = {};
  s.t_lo = 0.8, s.t_hi = 0.2;
  EXPECT_THROW(fp::validate_sync(s), fp::Error);
  s = {};
  s.weighting = fp::WeightingMode::adaptive;
  s.adaptive.temperature = -1;
  EXPECT_THROW(fp::validate_sync(s), fp::Error);
  s = {};
  s.interval = 3, s.t_lo = 0.2, s.t_hi = 0.6;
  EXPECT_TRUE(s.active(3, 0.5));
  EXPECT_FALSE(s.active(4, 0.5));
  EXPECT_FALSE(s.active(3, 0.7));
}

TEST(SyncX0, RendersOfOneTextureAreAFixedPoint) {
  SyncFixture f;
  const auto tex = fp::fixture::smooth_texture(f.scene.atlas, 5);
  const auto x0 = fp::render_views(tex, f.scene.geometry, f.scene.layout).assemble();
  for (auto mode : {fp::WeightingMode::cosine, fp::WeightingMode::adaptive}) {
    fp::SyncConfig sync;
    sync.weighting = mode;
    sync.adaptive = {2.0, 1.0, 0.5, 0.7};
    const auto r = fp::sync_x0(x0, f.ctx, f.codec, sync, 0.6);
    EXPECT_EQ(r.x0, x0);
    // fused texture agrees with the source wherever any view saw it
    for (std::size_t t = 0; t < tex.texel_count(); ++t)
      if (r.fused.validity[t])
        for (int c = 0; c < 3; ++c) ASSERT_EQ(r.fused.colors.data()[3 * t + c], tex.colors.data()[3 * t + c]);
  }
}

TEST(SyncX0, ConstantOffsetsAverageAcrossViews) {
  SyncFixture f;
  const fp::TextureMap gray(32, {0.5, 0.5, 0.5}, true);
  auto grid = fp::render_views(gray, f.scene.geometry, f.scene.layout);
  const double offsets[4] = {-0.2, 0.1, 0.3, 0.0};
  for (int v = 0; v < 4; ++v)
    for (std::size_t p = 0; p < grid.tiles[v].pixel_count(); ++p)
      if (f.scene.geometry[v].coverage[p])
        for (int c = 0; c < 3; ++c) grid.tiles[v].data()[3 * p + c] += offsets[v];
  fp::SyncConfig sync;
  sync.cosine_beta = 0.0;  // equal weights
  const auto before = grid.assemble();
  const auto r = fp::sync_x0(before, f.ctx, f.codec, sync, 0.5);
  for (std::size_t t = 0; t < r.fused.texel_count(); ++t) {
    if (!r.fused.validity[t]) continue;
    double sum = 0;
    int n = 0;
    for (int v = 0; v < 4; ++v)
      if (r.partials[v].covered[t]) sum += 0.5 + offsets[v], ++n;
    EXPECT_NEAR(r.fused.colors.data()[3 * t], sum / n, 1e-12);
  }
  // every synced foreground pixel is now a render of the fused texture,
  // background and unmatched pixels keep their decoded value
  const auto after = fp::GridImage::split(r.x0, f.scene.layout);
  for (int v = 0; v < 4; ++v) {
    auto render = f.scene.geometry[v];
    fp::shade(render, r.fused, fp::Sampling::nearest);
    for (std::size_t p = 0; p < render.coverage.size(); ++p) {
      const bool synced = render.coverage[p] && render.texel_valid[p];
      const double expect = synced ? render.color.data()[3 * p] : grid.tiles[v].data()[3 * p];
      ASSERT_EQ(after.tiles[v].data()[3 * p], expect);
    }
  }
}

TEST(SyncX0, EmptyMeshLeavesStateAlone) {
  const fp::TriMesh empty;
  fp::RigSpec spec;
  spec.resolution = 16;
  const auto rig = fp::make_surround_rig(spec);
  const auto atlas = fp::bake_atlas_maps(empty, 16);
  const auto x0 = random_tensor(32, 32, 3);
  const auto r = fp::sync_x0(x0, empty, rig, atlas, fp::IdentityCodec{}, {}, 0.5);
  EXPECT_EQ(r.x0, x0);
  EXPECT_EQ(r.fused.validity.count(), 0u);
}

TEST(SyncX0, RejectsWrongGridSize) {
  SyncFixture f;
  EXPECT_THROW(fp::sync_x0(random_tensor(48, 64, 1), f.ctx, f.codec, {}, 0.5), fp::Error);
  fp::RigSpec spec;
  spec.view_count = 3;
  spec.resolution = 8;
  const auto rig3 = fp::make_surround_rig(spec);
  EXPECT_THROW(fp::SyncContext(f.scene.mesh, rig3, f.scene.atlas), fp::Error);
}

TEST(Sampler, OracleReachesTargetForAnyStepCount) {
  SyncFixture f;
  const auto target = fp::render_views(fp::fixture::smooth_texture(f.scene.atlas, 2), f.scene.geometry,
                                       f.scene.layout).assemble();
  const fp::OracleVelocity oracle(target);
  for (int steps : {1, 2, 7, 30}) {
    fp::SamplerConfig cfg;
    cfg.steps = steps;
    cfg.seed = 11;
    cfg.sync.enabled = false;
    const auto r = fp::sample(oracle, f.bundle, f.ctx, f.codec, cfg);
    EXPECT_LT(max_abs_diff(r.final_grid.assemble(), target), 1e-12) << steps;
    EXPECT_EQ(r.synced_steps, 0);
    EXPECT_GT(r.fused.validity.count(), 0u);
  }
}

TEST(Sampler, SyncedOracleKeepsForegroundAndRecoversTexture) {
  SyncFixture f;
  const auto tex = fp::fixture::smooth_texture(f.scene.atlas, 4);
  const auto target = fp::render_views(tex, f.scene.geometry, f.scene.layout).assemble();
  const fp::OracleVelocity oracle(target);
  fp::SamplerConfig cfg;
  cfg.steps = 8;
  double worst = 0;
  int seen = 0;
  const auto r = fp::sample(oracle, f.bundle, f.ctx, f.codec, cfg, [&](const fp::StepRecord& rec) {
    ASSERT_TRUE(rec.synced);
    ++seen;
    const auto a = fp::GridImage::split(*rec.x0, f.scene.layout), b = fp::GridImage::split(*rec.x0_synced, f.scene.layout);
    for (int v = 0; v < 4; ++v)
      for (std::size_t p = 0; p < f.scene.geometry[v].coverage.size(); ++p)
        if (f.scene.geometry[v].coverage[p])
          for (int c = 0; c < 3; ++c)
            worst = std::max(worst, std::abs(a.tiles[v].data()[3 * p + c] - b.tiles[v].data()[3 * p + c]));
  });
  EXPECT_EQ(seen, 8);
  EXPECT_EQ(r.synced_steps, 8);
  EXPECT_LT(worst, 1e-5);
  std::size_t visible = 0;
  for (std::size_t t = 0; t < tex.texel_count(); ++t) {
    bool any = false;
    for (const auto& p : f.ctx.projections()) any |= p.pixel[t] >= 0;
    ASSERT_EQ(r.fused.validity[t], any);
    if (!any) continue;
    ++visible;
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(r.fused.colors.data()[3 * t + c], tex.colors.data()[3 * t + c], 1e-12);
  }
  EXPECT_GT(visible, 200u);
}

TEST(Sampler, SyncReducesCrossViewDisagreement) {
  SyncFixture f;
  const auto target = fp::render_views(fp::fixture::smooth_texture(f.scene.atlas, 6), f.scene.geometry,
                                       f.scene.layout).assemble();
  double on = 0, off = 0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const fp::NoisyOracleVelocity model(target, f.scene.layout, {0.1, 0.0, seed});
    fp::SamplerConfig cfg;
    cfg.steps = 10;
    cfg.seed = seed;
    for (bool enabled : {true, false}) {
      cfg.sync.enabled = enabled;
      const auto r = fp::sample(model, f.bundle, f.ctx, f.codec, cfg);
      const double d = fp::cross_view_disagreement(fp::reproject_grid(r.final_grid, f.ctx.projections()));
      (enabled ? on : off) += d;
    }
  }
  EXPECT_LT(on, off);
  EXPECT_GT(off, 0.0);
}

TEST(Sampler, ScheduleGuidanceAndConditioning) {
  SyncFixture f;
  SpyModel spy(fp::Tensor(64, 64, 3, 0.0));
  fp::SamplerConfig cfg;
  cfg.steps = 4;
  cfg.distilled_scale = 6.0;
  cfg.sync.interval = 2;
  cfg.sync.t_hi = 0.9;
  int synced = 0;
  const auto r = fp::sample(spy, f.bundle, f.ctx, f.codec, cfg, [&](const fp::StepRecord& rec) {
    EXPECT_DOUBLE_EQ(rec.t, 1.0 - rec.step / 4.0);
    synced += rec.synced;
    // only step 2 (t = 0.5) is both on the interval and inside the window
    EXPECT_EQ(rec.synced, rec.step == 2);
  });
  EXPECT_EQ(synced, 1);
  EXPECT_EQ(r.synced_steps, 1);
  ASSERT_EQ(spy.calls.size(), 8u);
  for (std::size_t i = 0; i < spy.calls.size(); ++i) {
    EXPECT_EQ(spy.calls[i].negative, i % 2 == 1);
    EXPECT_EQ(spy.calls[i].distilled, 6.0);
    EXPECT_EQ(spy.calls[i].depth_views, 4);
  }
  // without sync a zero velocity leaves the seeded noise in place
  cfg.sync.enabled = false;
  EXPECT_EQ(fp::sample(spy, f.bundle, f.ctx, f.codec, cfg).final_state, fp::gaussian_tensor(64, 64, 3, cfg.seed));
}

TEST(Sampler, DeterministicForFixedSeed) {
  SyncFixture f;
  const auto target = fp::render_views(fp::fixture::smooth_texture(f.scene.atlas, 8), f.scene.geometry,
                                       f.scene.layout).assemble();
  const fp::NoisyOracleVelocity model(target, f.scene.layout, {0.1, 0.05, 3});
  fp::SamplerConfig cfg;
  cfg.steps = 5;
  cfg.seed = 21;
  const auto a = fp::sample(model, f.bundle, f.ctx, f.codec, cfg);
  const auto b = fp::sample(model, f.bundle, f.ctx, f.codec, cfg);
  EXPECT_EQ(a.final_state, b.final_state);
  EXPECT_EQ(a.fused.colors, b.fused.colors);
  cfg.seed = 22;
  EXPECT_NE(fp::sample(model, f.bundle, f.ctx, f.codec, cfg).final_state, a.final_state);
}

TEST(Sampler, Errors) {
  SyncFixture f;
  fp::SamplerConfig cfg;
  cfg.steps = 0;
  const fp::OracleVelocity oracle(fp::Tensor(64, 64, 3));
  EXPECT_THROW(fp::sample(oracle, f.bundle, f.ctx, f.codec, cfg), fp::Error);
  cfg.steps = 3;
  SpyModel nan_model(fp::Tensor(64, 64, 3, std::nan("")));
  try {
    fp::sample(nan_model, f.bundle, f.ctx, f.codec, cfg);
    FAIL();
  } catch (const fp::Error& e) {
    EXPECT_NE(std::string(e.what()).find("step 0"), std::string::npos) << e.what();
  }
}

TEST(NoisyOracle, BiasShiftsEachViewByConstant) {
  const fp::GridLayout layout{2, 2};
  const auto target = random_tensor(8, 8, 1);
  const fp::NoisyOracleVelocity model(target, layout, {0.1, 0.0, 5});
  const double t = 0.4;
  const auto x = random_tensor(8, 8, 2);
  const auto x0 = fp::predict_x0(x, model.velocity(x, t, {}, {}), t);
  for (int y = 0; y < 8; ++y)
    for (int xx = 0; xx < 8; ++xx) {
      const int view = (y / 4) * 2 + xx / 4;
      for (int c = 0; c < 3; ++c)
        EXPECT_NEAR(x0.at(xx, y, c) - target.at(xx, y, c), -t * model.bias()[3 * view + c], 1e-12);
    }
  EXPECT_EQ(model.velocity(x, t, {}, {}), model.velocity(x, t, {}, {}));
}
