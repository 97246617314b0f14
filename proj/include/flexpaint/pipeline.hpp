// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <iomanip>

#include "flexpaint/config.hpp"
#include "flexpaint/flowsync.hpp"
#include "flexpaint/io.hpp"
#include "flexpaint/obj_io.hpp"
#include "flexpaint/primitives.hpp"
#include "flexpaint/uvtools.hpp"

namespace flexpaint {

// -----------------------------------------------------------------------------
// Weighter parameter files
// -----------------------------------------------------------------------------

inline std::string params_to_json(const WeighterParams& p) {
  nlohmann::ordered_json j;
  j["beta"] = p.beta;
  j["lambda_edge"] = p.lambda_edge;
  j["lambda_t"] = p.lambda_t;
  j["temperature"] = p.temperature;
  return j.dump(2) + "\n";
}

inline WeighterParams params_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed weighter parameters: ") + e.what());
  }
  require(j.is_object(), "weighter parameters must be a JSON object");
  WeighterParams p;
  auto read = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    require(j[key].is_number(), std::string("weighter parameter '") + key + "' must be a number");
    dst = j[key].get<double>();
  };
  read("beta", p.beta);
  read("lambda_edge", p.lambda_edge);
  read("lambda_t", p.lambda_t);
  read("temperature", p.temperature);
  validate_params(p);
  return p;
}

inline WeighterParams load_params(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open weighter parameters '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return params_from_json(ss.str());
}

inline void save_params(const WeighterParams& p, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write weighter parameters '" + path + "'");
  out << params_to_json(p);
}

// -----------------------------------------------------------------------------
// Pipeline configuration
// -----------------------------------------------------------------------------

enum class NegativeMode { white, grayscale_ref };

struct ImageCondition {
  std::string path;
  double alpha = 1.0;
};

struct PipelineConfig {
  std::string mesh = "builtin:icosphere";
  bool normalize = true;
  int texture_resolution = 256;
  RigSpec rig = [] {
    RigSpec r;
    r.resolution = 256;
    return r;
  }();
  SamplerConfig sampler;
  ReprojectOptions reproject;
  std::string prompt;
  std::vector<ImageCondition> images;
  std::string style_reference;
  double style_alpha = 1.0;
  NegativeMode negative = NegativeMode::white;
  std::string weighter_params;
  double model_bias = 0.05;  // per-view color bias of the toy model
  bool complete = true;
  CompletionOptions completion;
  bool enhance = true;
  EnhanceOptions enhancement;
  std::string output_dir = "flexpaint_out";
  bool dump_steps = false;  // step_NNN_fused.png for every synced step
};

namespace detail {

inline bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

inline std::vector<ImageCondition> parse_image_list(const std::string& s) {
  // path[:alpha], comma separated
  std::vector<ImageCondition> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = KeyValueConfig::trim(item);
    if (item.empty()) continue;
    ImageCondition c;
    const auto colon = item.rfind(':');
    c.path = item;
    if (colon != std::string::npos) {
      double a = 0;
      const auto tail = item.substr(colon + 1);
      auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), a);
      if (ec == std::errc{} && ptr == tail.data() + tail.size()) {
        require(std::isfinite(a), "image scale factor must be finite");
        c.path = item.substr(0, colon);
        c.alpha = a;
      }
    }
    out.push_back(c);
  }
  return out;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

inline void validate_config(const PipelineConfig& c) {
  require(detail::power_of_two(c.texture_resolution) && c.texture_resolution >= 16,
          "texture.resolution must be a power of two >= 16");
  require(detail::power_of_two(c.rig.resolution) && c.rig.resolution >= 16,
          "rig.resolution must be a power of two >= 16");
  require(c.sampler.steps >= 1, "sampler.steps must be at least 1");
  require(std::isfinite(c.sampler.cfg_scale) && std::isfinite(c.sampler.distilled_scale), "CFG scales must be finite");
  for (const auto& im : c.images) require(std::isfinite(im.alpha), "image scale factor must be finite");
  require(std::isfinite(c.style_alpha), "style scale factor must be finite");
  require(c.negative != NegativeMode::grayscale_ref || !c.style_reference.empty(),
          "negative mode grayscale-ref needs condition.style_reference");
  require(c.model_bias >= 0, "model.bias must be non-negative");
  validate_sync(c.sampler.sync);
}

/// Builds a config from parsed keys. Unknown keys are an error.
inline PipelineConfig config_from(const KeyValueConfig& kv) {
  PipelineConfig c;
  c.mesh = kv.get("mesh.path", c.mesh);
  c.normalize = kv.get("mesh.normalize", c.normalize);
  c.texture_resolution = kv.get("texture.resolution", c.texture_resolution);

  c.rig.view_count = kv.get("rig.views", c.rig.view_count);
  c.rig.elevation_deg = kv.get("rig.elevation", c.rig.elevation_deg);
  c.rig.distance = kv.get("rig.distance", c.rig.distance);
  c.rig.resolution = kv.get("rig.resolution", c.rig.resolution);
  const auto proj = kv.get("rig.projection", "perspective");
  require(proj == "perspective" || proj == "orthographic", "rig.projection must be perspective or orthographic");
  c.rig.projection.kind = proj == "perspective" ? ProjectionKind::perspective : ProjectionKind::orthographic;
  c.rig.projection.fov_deg = kv.get("rig.fov", c.rig.projection.fov_deg);
  c.rig.projection.half_height = kv.get("rig.half_height", c.rig.projection.half_height);
  c.rig.near = kv.get("rig.near", c.rig.near);
  c.rig.far = kv.get("rig.far", c.rig.far);

  c.sampler.steps = kv.get("sampler.steps", c.sampler.steps);
  c.sampler.cfg_scale = kv.get("sampler.cfg_scale", c.sampler.cfg_scale);
  c.sampler.distilled_scale = kv.get("sampler.distilled_scale", c.sampler.distilled_scale);
  const int seed = kv.get("sampler.seed", 0);
  require(seed >= 0, "sampler.seed must be non-negative");
  c.sampler.seed = static_cast<std::uint64_t>(seed);

  auto& s = c.sampler.sync;
  s.enabled = kv.get("sync.enabled", s.enabled);
  const auto weighting = kv.get("sync.weighting", "cosine");
  require(weighting == "cosine" || weighting == "adaptive", "sync.weighting must be cosine or adaptive");
  s.weighting = weighting == "cosine" ? WeightingMode::cosine : WeightingMode::adaptive;
  s.cosine_beta = kv.get("sync.cosine_beta", s.cosine_beta);
  s.interval = kv.get("sync.interval", s.interval);
  s.t_lo = kv.get("sync.t_lo", s.t_lo);
  s.t_hi = kv.get("sync.t_hi", s.t_hi);
  c.weighter_params = kv.get("weighter.params", c.weighter_params);

  c.reproject.depth_tolerance = kv.get("reproject.depth_tolerance", c.reproject.depth_tolerance);
  c.reproject.cos_cutoff = kv.get("reproject.cos_cutoff", c.reproject.cos_cutoff);

  c.prompt = kv.get("condition.prompt", c.prompt);
  c.images = detail::parse_image_list(kv.get("condition.images", ""));
  c.style_reference = kv.get("condition.style_reference", c.style_reference);
  c.style_alpha = kv.get("condition.style_alpha", c.style_alpha);
  const auto neg = kv.get("condition.negative", "white");
  require(neg == "white" || neg == "grayscale-ref", "condition.negative must be white or grayscale-ref");
  c.negative = neg == "white" ? NegativeMode::white : NegativeMode::grayscale_ref;
  c.model_bias = kv.get("model.bias", c.model_bias);

  c.complete = kv.get("completion.enabled", c.complete);
  c.completion.neighbors = kv.get("completion.neighbors", c.completion.neighbors);
  c.completion.power = kv.get("completion.power", c.completion.power);
  c.enhance = kv.get("enhance.enabled", c.enhance);
  c.enhancement.factor = kv.get("enhance.factor", c.enhancement.factor);
  c.enhancement.sharpen = kv.get("enhance.sharpen", c.enhancement.sharpen);
  c.enhancement.margin = kv.get("enhance.margin", c.enhancement.margin);
  c.output_dir = kv.get("output.dir", c.output_dir);
  c.dump_steps = kv.get("output.dump_steps", c.dump_steps);

  const auto unused = kv.unused_keys();
  if (!unused.empty()) throw Error("unknown config key '" + unused.front() + "'");
  if (s.weighting == WeightingMode::adaptive && !c.weighter_params.empty()) s.adaptive = load_params(c.weighter_params);
  validate_config(c);
  return c;
}

/// Config file (may be empty) followed by `key=value` overrides.
inline PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  KeyValueConfig kv = path.empty() ? KeyValueConfig{} : KeyValueConfig::load(path);
  for (const auto& o : overrides) kv.assign(o);
  return config_from(kv);
}

/// Canonical key/value echo of a config, one `key = value` per line.
inline std::string describe_config(const PipelineConfig& c) {
  using detail::format_double;
  std::ostringstream os;
  auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
  kv("mesh.path", c.mesh);
  kv("mesh.normalize", c.normalize ? "true" : "false");
  kv("texture.resolution", std::to_string(c.texture_resolution));
  kv("rig.views", std::to_string(c.rig.view_count));
  kv("rig.elevation", format_double(c.rig.elevation_deg));
  kv("rig.distance", format_double(c.rig.distance));
  kv("rig.resolution", std::to_string(c.rig.resolution));
  kv("rig.projection", c.rig.projection.kind == ProjectionKind::perspective ? "perspective" : "orthographic");
  kv("rig.fov", format_double(c.rig.projection.fov_deg));
  kv("rig.half_height", format_double(c.rig.projection.half_height));
  kv("sampler.steps", std::to_string(c.sampler.steps));
  kv("sampler.cfg_scale", format_double(c.sampler.cfg_scale));
  kv("sampler.distilled_scale", format_double(c.sampler.distilled_scale));
  kv("sampler.seed", std::to_string(c.sampler.seed));
  kv("sync.enabled", c.sampler.sync.enabled ? "true" : "false");
  kv("sync.weighting", c.sampler.sync.weighting == WeightingMode::cosine ? "cosine" : "adaptive");
  kv("sync.cosine_beta", format_double(c.sampler.sync.cosine_beta));
  kv("sync.interval", std::to_string(c.sampler.sync.interval));
  kv("sync.t_lo", format_double(c.sampler.sync.t_lo));
  kv("sync.t_hi", format_double(c.sampler.sync.t_hi));
  kv("condition.prompt", c.prompt);
  std::string imgs;
  for (const auto& im : c.images) imgs += (imgs.empty() ? "" : ",") + im.path + ":" + format_double(im.alpha);
  kv("condition.images", imgs);
  kv("condition.style_reference", c.style_reference);
  kv("condition.negative", c.negative == NegativeMode::white ? "white" : "grayscale-ref");
  kv("model.bias", format_double(c.model_bias));
  kv("completion.enabled", c.complete ? "true" : "false");
  kv("enhance.enabled", c.enhance ? "true" : "false");
  kv("enhance.factor", std::to_string(c.enhancement.factor));
  kv("output.dump_steps", c.dump_steps ? "true" : "false");
  return os.str();
}

// -----------------------------------------------------------------------------
// Mesh sources
// -----------------------------------------------------------------------------

/// `builtin:quad`, `builtin:cube`, `builtin:icosphere` or an OBJ path.
inline TriMesh load_mesh(const std::string& source, bool normalize = true) {
  TriMesh mesh;
  if (source == "builtin:quad")
    mesh = make_quad();
  else if (source == "builtin:cube")
    mesh = make_cube();
  else if (source == "builtin:icosphere")
    mesh = make_icosphere();
  else if (source.rfind("builtin:", 0) == 0)
    throw Error("unknown builtin mesh '" + source + "'");
  else
    mesh = load_obj(source);
  return normalize ? normalize_mesh(mesh) : mesh;
}

// -----------------------------------------------------------------------------
// Toy conditional model
// -----------------------------------------------------------------------------

/// Smooth procedural texture whose colors are a fixed function of a
/// condition vector and the surface position.
inline TextureMap procedural_texture(const UvAtlasMaps& atlas, const std::vector<double>& condition) {
  std::array<double, 12> coef{};
  std::uint64_t state = 0xC0FFEE5EEDull;
  for (auto& c : coef) {
    for (double e : condition) c += detail::signed_unit(state) * e;
    c /= std::sqrt(std::max<std::size_t>(1, condition.size()));
  }
  TextureMap tex(atlas.resolution);
  for (std::size_t t = 0; t < atlas.texel_count(); ++t) {
    if (!atlas.validity[t]) continue;
    const auto p = atlas.position_at(t);
    Color col;
    for (int ch = 0; ch < 3; ++ch) {
      const double* k = &coef[4 * ch];
      const double wave = std::sin(6.0 * (k[1] * p.x + k[2] * p.y + k[3] * p.z) + 3.0 * k[0]);
      col[ch] = 0.5 + 0.3 * std::tanh(4.0 * k[0]) + 0.2 * wave;
    }
    tex.set_color(t, col);
    tex.validity.set(t, true);
  }
  // margin colors keep chart-edge pixels from sampling the sentinel
  return dilate_margins(tex, 4);
}

/// Deterministic stand-in for a conditional image generator: each condition
/// (positive slots or negative embedding) maps to a procedural texture whose
/// renders are the flow target, plus a seeded per-view color bias that makes
/// views disagree unless synchronized.
class ToyConditionalModel : public VelocityModel {
 public:
  ToyConditionalModel(const ConditionBundle& bundle, const UvAtlasMaps& atlas,
                      const std::vector<RenderOutputs>& geometry, GridLayout layout, double bias, std::uint64_t seed)
      : bundle_(&bundle) {
    std::vector<double> neg(bundle.text.values.size(), 0.0);
    neg.insert(neg.end(), bundle.negative.values.begin(), bundle.negative.values.end());
    positive_ = make(render_views(procedural_texture(atlas, bundle.positive()), geometry, layout).assemble(), layout,
                     bias, seed);
    negative_ = make(render_views(procedural_texture(atlas, neg), geometry, layout).assemble(), layout, bias,
                     seed ^ 0x4E47ull);
  }

  Tensor velocity(const Tensor& x, double t, const ModelCondition& cond, const GridImage& depth) const override {
    require(cond.bundle == nullptr || cond.bundle == bundle_, "toy model was built for a different condition");
    return (cond.negative ? negative_ : positive_)->velocity(x, t, cond, depth);
  }

 private:
  static std::unique_ptr<VelocityModel> make(Tensor target, GridLayout layout, double bias, std::uint64_t seed) {
    return std::make_unique<NoisyOracleVelocity>(std::move(target), layout, NoisyOracleOptions{bias, 0.0, seed});
  }

  const ConditionBundle* bundle_;
  std::unique_ptr<VelocityModel> positive_, negative_;
};

// -----------------------------------------------------------------------------
// Pipeline
// -----------------------------------------------------------------------------

inline ConditionBundle build_condition(const PipelineConfig& c) {
  const Embedding text = embed_text(c.prompt);
  std::vector<WeightedImageEmbedding> images;
  for (const auto& im : c.images) images.push_back({im.alpha, embed_image(load_png_rgb(im.path))});
  Image reference;
  if (!c.style_reference.empty()) {
    reference = load_png_rgb(c.style_reference);
    images.push_back({c.style_alpha, embed_image(reference)});
  }
  ConditionBundle bundle = aggregate(text, images);
  if (c.negative == NegativeMode::grayscale_ref) bundle.negative = grayscale_negative(reference);
  return bundle;
}

struct PipelineResult {
  std::vector<std::string> artifacts;  // file names relative to output_dir
  std::vector<std::pair<std::string, double>> timings;
  TextureMap fused, completed, enhanced;
  ConditionBundle condition;
  int synced_steps = 0;
};

namespace detail {

/// Runs `body` and prefixes any error with the stage name.
template <class F>
auto run_stage(const std::string& stage, std::vector<std::pair<std::string, double>>& timings, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  auto stop = [&] {
    timings.emplace_back(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  };
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      stop();
    } else {
      auto r = body();
      stop();
      return r;
    }
  } catch (const std::exception& e) {
    throw Error("stage '" + stage + "': " + e.what());
  }
}

}  // namespace detail

/// Full texture pipeline: condition -> sample with view sync -> complete ->
/// enhance. Artifacts are written with a `.partial` suffix and renamed once
/// every stage has succeeded, so a failed run leaves only `.partial` files.
/// Stage timings go to timings.txt so manifest.txt stays reproducible.
inline PipelineResult run_pipeline(const PipelineConfig& config) {
  namespace fs = std::filesystem;
  validate_config(config);
  PipelineResult res;
  auto& timings = res.timings;
  const fs::path dir(config.output_dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, auto&& writer) {
    writer((dir / (name + ".partial")).string());
    written.push_back(name);
  };

  detail::run_stage("output", timings, [&] { fs::create_directories(dir); });
  const TriMesh mesh = detail::run_stage("mesh", timings, [&] { return load_mesh(config.mesh, config.normalize); });
  const CameraRig rig = detail::run_stage("rig", timings, [&] { return make_surround_rig(config.rig); });
  const GridLayout layout = default_layout(rig.size());
  const UvAtlasMaps atlas =
      detail::run_stage("atlas", timings, [&] { return bake_atlas_maps(mesh, config.texture_resolution); });
  res.condition = detail::run_stage("condition", timings, [&] { return build_condition(config); });

  detail::run_stage("depth", timings, [&] {
    const auto depth = render_depth_grid(mesh, rig, layout);
    emit("depth.png", [&](const std::string& p) { save_png(depth.assemble(), p); });
  });

  detail::run_stage("sample", timings, [&] {
    const SyncContext ctx(mesh, rig, atlas, layout, config.reproject);
    const ToyConditionalModel model(res.condition, atlas, ctx.geometry(), layout, config.model_bias,
                                    config.sampler.seed);
    const IdentityCodec codec;
    std::function<void(const StepRecord&)> dump;
    if (config.dump_steps)
      dump = [&](const StepRecord& r) {
        if (!r.fused) return;
        std::ostringstream name;
        name << "step_" << std::setw(3) << std::setfill('0') << r.step << "_fused.png";
        emit(name.str(), [&](const std::string& p) { save_texture_png(*r.fused, p); });
      };
    auto out = sample(model, res.condition, ctx, codec, config.sampler, dump);
    res.synced_steps = out.synced_steps;
    res.fused = std::move(out.fused);
    emit("views.png", [&](const std::string& p) { save_png(out.final_grid.assemble(), p); });
    emit("fused.png", [&](const std::string& p) { save_texture_png(res.fused, p); });
  });

  detail::run_stage("complete", timings, [&] {
    const bool any = res.fused.validity.count() > 0;
    res.completed = config.complete && any ? complete_texture(res.fused, atlas, config.completion) : res.fused;
    emit("completed.png", [&](const std::string& p) { save_texture_png(res.completed, p); });
  });

  detail::run_stage("enhance", timings, [&] {
    if (config.enhance) {
      const auto atlas_hi = bake_atlas_maps(mesh, config.texture_resolution * config.enhancement.factor);
      res.enhanced = enhance_texture(res.completed, atlas_hi, config.enhancement);
    } else {
      res.enhanced = res.completed;
    }
    emit("enhanced.png", [&](const std::string& p) { save_texture_png(res.enhanced, p); });
  });

  detail::run_stage("manifest", timings, [&] {
    emit("manifest.txt", [&](const std::string& p) {
      std::ofstream out(p);
      require(static_cast<bool>(out), "cannot write manifest '" + p + "'");
      out << describe_config(config);
      out << "run.synced_steps = " << res.synced_steps << '\n';
      out << "run.atlas_valid_texels = " << atlas.validity.count() << '\n';
      out << "run.contested_texels = " << atlas.contested_texels << '\n';
      out << "run.fused_valid_texels = " << res.fused.validity.count() << '\n';
      for (const auto& name : written) out << "artifact." << name.substr(0, name.find('.')) << " = " << name << '\n';
      out << "artifact.timings = timings.txt\n";
    });
  });

  for (const auto& name : written) fs::rename(dir / (name + ".partial"), dir / name);
  res.artifacts = written;
  {
    std::ofstream out(dir / "timings.txt");
    for (const auto& [stage, sec] : timings) out << "timing." << stage << " = " << sec << '\n';
  }
  res.artifacts.push_back("timings.txt");
  return res;
}

// -----------------------------------------------------------------------------
// Evaluation
// -----------------------------------------------------------------------------

struct EvalReport {
  double texel_l1 = 0;        // mean |fused - GT| over fused-valid texels
  double disagreement = 0;    // cross-view disagreement of the final views
  double cycle = 0;           // loss_cycle of the final partials vs fused
  double coverage = 0;        // fused-valid / atlas-valid texels
  std::size_t shared_texels = 0;

  std::string table() const {
    std::ostringstream os;
    os << std::left << std::setw(24) << "metric" << "value\n";
    os << std::setw(24) << "texel_l1" << texel_l1 << '\n';
    os << std::setw(24) << "view_disagreement" << disagreement << '\n';
    os << std::setw(24) << "loss_cycle" << cycle << '\n';
    os << std::setw(24) << "coverage" << coverage << '\n';
    os << std::setw(24) << "shared_texels" << shared_texels << '\n';
    return os.str();
  }

  std::string key_values() const {
    using detail::format_double;
    return "eval.texel_l1 = " + format_double(texel_l1) + "\neval.view_disagreement = " + format_double(disagreement) +
           "\neval.loss_cycle = " + format_double(cycle) + "\neval.coverage = " + format_double(coverage) +
           "\neval.shared_texels = " + std::to_string(shared_texels) + "\n";
  }
};

/// Metrics of a set of final views against a ground-truth texture.
inline EvalReport evaluate_views(const GridImage& views, const TextureMap& ground_truth, const SyncContext& ctx,
                                 const SyncConfig& sync) {
  EvalReport r;
  const auto partials = reproject_grid(views, ctx.projections());
  const auto fused = fuse(partials, compute_weights(partials, ctx.atlas(), sync, 0.0));
  r.disagreement = cross_view_disagreement(partials, &r.shared_texels);
  r.cycle = loss_cycle(partials, fused, ctx.geometry());
  std::size_t n = 0;
  for (std::size_t t = 0; t < fused.texel_count(); ++t) {
    if (!fused.validity[t] || !ground_truth.validity[t]) continue;
    const auto a = fused.color(t), b = ground_truth.color(t);
    r.texel_l1 += (std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2])) / 3;
    ++n;
  }
  r.texel_l1 = n ? r.texel_l1 / n : 0.0;
  const auto atlas_valid = ctx.atlas().validity.count();
  r.coverage = atlas_valid ? static_cast<double>(fused.validity.count()) / atlas_valid : 0.0;
  return r;
}

/// Samples with a noisy oracle aimed at the ground truth's renders (bias from
/// model.bias) and reports how far the result is from it. With a candidate
/// texture, its renders are scored instead of sampling.
inline EvalReport run_eval(const PipelineConfig& config, const TextureMap& ground_truth,
                           const TextureMap* candidate = nullptr) {
  validate_config(config);
  require(ground_truth.resolution() == config.texture_resolution,
          "ground-truth texture resolution does not match texture.resolution");
  const TriMesh mesh = load_mesh(config.mesh, config.normalize);
  const CameraRig rig = make_surround_rig(config.rig);
  const GridLayout layout = default_layout(rig.size());
  const UvAtlasMaps atlas = bake_atlas_maps(mesh, config.texture_resolution);
  const SyncContext ctx(mesh, rig, atlas, layout, config.reproject);
  if (candidate) {
    require(candidate->resolution() == config.texture_resolution, "candidate texture resolution does not match");
    return evaluate_views(render_views(*candidate, ctx.geometry(), layout), ground_truth, ctx, config.sampler.sync);
  }
  const Tensor target = render_views(ground_truth, ctx.geometry(), layout).assemble();
  const NoisyOracleVelocity model(target, layout, {config.model_bias, 0.0, config.sampler.seed});
  const ConditionBundle bundle = aggregate(embed_text(config.prompt), {});
  const auto out = sample(model, bundle, ctx, IdentityCodec{}, config.sampler);
  return evaluate_views(out.final_grid, ground_truth, ctx, config.sampler.sync);
}

}  // namespace flexpaint
