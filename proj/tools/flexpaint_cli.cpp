// Copyright 2026 The FlexPaint Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Every geometry-dependent subcommand reads the same
// config keys as `texture` (--config FILE, --set key=value) so renders,
// reprojections and fits line up with pipeline runs.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <random>

#include "flexpaint/flexpaint.hpp"

namespace fp = flexpaint;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string mesh;

  fp::PipelineConfig load() const {
    auto overrides = sets;
    if (!mesh.empty()) overrides.push_back("mesh.path=" + mesh);
    return fp::load_config(config, overrides);
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key/value config file");
  cmd->add_option("--set", c.sets, "override, key=value (repeatable)");
  cmd->add_option("--mesh", c.mesh, "OBJ path or builtin:quad|cube|icosphere");
}

struct Scene {
  fp::PipelineConfig config;
  fp::TriMesh mesh;
  fp::CameraRig rig;
  fp::GridLayout layout;
  fp::UvAtlasMaps atlas;
};

Scene make_scene(const Common& c) {
  Scene s;
  s.config = c.load();
  s.mesh = fp::load_mesh(s.config.mesh, s.config.normalize);
  s.rig = fp::make_surround_rig(s.config.rig);
  s.layout = fp::default_layout(s.rig.size());
  s.atlas = fp::bake_atlas_maps(s.mesh, s.config.texture_resolution);
  return s;
}

fp::TextureMap load_texture_for(const Scene& s, const std::string& path) {
  auto tex = fp::load_texture_png(path);
  fp::require(tex.resolution() == s.config.texture_resolution,
              "texture '" + path + "' is " + std::to_string(tex.resolution()) + "^2 but texture.resolution is " +
                  std::to_string(s.config.texture_resolution));
  return tex;
}

fp::WeightField weights_for(const std::vector<fp::PartialTexture>& partials, const fp::UvAtlasMaps& atlas,
                            const std::string& params_path, double beta, double t) {
  if (params_path.empty()) return fp::cosine_weights(partials, beta);
  return fp::weighter_score(partials, atlas, t, fp::load_params(params_path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FlexPaint texture pipeline tools"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (overrides FLEXPAINT_THREADS)");

  // render
  Common render_c;
  std::string render_tex, render_out, render_depth, render_depth_pfm;
  bool render_bilinear = false;
  auto* render = app.add_subcommand("render", "render a texture from the rig as a view grid");
  add_common(render, render_c);
  render->add_option("--texture", render_tex, "texture PNG (omit for geometry only)");
  render->add_option("--out", render_out, "view grid PNG");
  render->add_option("--depth", render_depth, "depth-condition grid PNG");
  render->add_option("--depth-pfm", render_depth_pfm, "depth-condition grid as PFM");
  render->add_flag("--bilinear", render_bilinear, "bilinear texture sampling");

  // reproject
  Common reproj_c;
  std::string reproj_grid, reproj_prefix;
  auto* reproject = app.add_subcommand("reproject", "lift a view grid onto the atlas as partial textures");
  add_common(reproject, reproj_c);
  reproject->add_option("--grid", reproj_grid, "view grid PNG")->required();
  reproject->add_option("--out-prefix", reproj_prefix, "writes PREFIX_<view>.png and PREFIX_<view>_mask.png")->required();

  // fuse
  Common fuse_c;
  std::string fuse_grid, fuse_out, fuse_params;
  double fuse_beta = 1.0, fuse_t = 0.0;
  auto* fuse = app.add_subcommand("fuse", "reproject a view grid and fuse it into one texture");
  add_common(fuse, fuse_c);
  fuse->add_option("--grid", fuse_grid, "view grid PNG")->required();
  fuse->add_option("--out", fuse_out, "fused texture PNG")->required();
  fuse->add_option("--params", fuse_params, "weighter parameters JSON (default: cosine weights)");
  fuse->add_option("--beta", fuse_beta, "cosine exponent");
  fuse->add_option("--t", fuse_t, "timestep passed to the weighter");

  // fit-weighter
  Common fit_c;
  std::string fit_gt, fit_out;
  int fit_samples = 8, fit_budget = 200;
  std::uint64_t fit_seed = 0;
  auto* fit = app.add_subcommand("fit-weighter", "fit weighter parameters on simulated noisy partials");
  add_common(fit, fit_c);
  fit->add_option("--texture", fit_gt, "ground-truth texture PNG")->required();
  fit->add_option("--samples", fit_samples, "simulated training samples");
  fit->add_option("--budget", fit_budget, "loss evaluations");
  fit->add_option("--seed", fit_seed, "simulation seed");
  fit->add_option("--out", fit_out, "parameters JSON")->required();

  // eval-loss
  Common loss_c;
  std::string loss_gt, loss_grid, loss_params;
  double loss_t = 0.5, loss_beta = 1.0;
  auto* eval_loss = app.add_subcommand("eval-loss", "weighter losses of a view grid against ground truth");
  add_common(eval_loss, loss_c);
  eval_loss->add_option("--texture", loss_gt, "ground-truth texture PNG")->required();
  eval_loss->add_option("--grid", loss_grid, "view grid PNG")->required();
  eval_loss->add_option("--params", loss_params, "weighter parameters JSON (default: cosine weights)");
  eval_loss->add_option("--beta", loss_beta, "cosine exponent");
  eval_loss->add_option("--t", loss_t, "timestep");

  // embed
  std::string embed_text_arg, embed_image_arg, embed_out;
  bool embed_gray = false;
  int embed_dim = fp::kDefaultEmbeddingDim;
  auto* embed = app.add_subcommand("embed", "compute a text or image embedding");
  auto* text_opt = embed->add_option("--text", embed_text_arg, "prompt");
  auto* image_opt = embed->add_option("--image", embed_image_arg, "image PNG");
  text_opt->excludes(image_opt);
  embed->add_flag("--grayscale", embed_gray, "embed the grayscale version of --image");
  embed->add_option("--dim", embed_dim, "embedding dimension");
  embed->add_option("--out", embed_out, "binary embedding file");

  // texture
  Common tex_c;
  std::string tex_out;
  auto* texture = app.add_subcommand("texture", "run the full texture pipeline");
  add_common(texture, tex_c);
  texture->add_option("--out", tex_out, "output directory (overrides output.dir)");

  // complete
  Common comp_c;
  std::string comp_in, comp_out;
  auto* complete = app.add_subcommand("complete", "fill texels missing from a partial texture");
  add_common(complete, comp_c);
  complete->add_option("--texture", comp_in, "partial texture PNG (alpha = validity)")->required();
  complete->add_option("--out", comp_out, "completed texture PNG")->required();

  // enhance
  Common enh_c;
  std::string enh_in, enh_out;
  auto* enhance = app.add_subcommand("enhance", "upscale, sharpen and dilate a texture");
  add_common(enhance, enh_c);
  enhance->add_option("--texture", enh_in, "texture PNG")->required();
  enhance->add_option("--out", enh_out, "enhanced texture PNG")->required();

  // eval
  Common ev_c;
  std::string ev_gt, ev_candidate, ev_report;
  auto* eval = app.add_subcommand("eval", "consistency metrics against a ground-truth texture");
  add_common(eval, ev_c);
  eval->add_option("--gt", ev_gt, "ground-truth texture PNG")->required();
  eval->add_option("--candidate", ev_candidate, "score this texture instead of sampling");
  eval->add_option("--report", ev_report, "key/value report file");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) setenv("FLEXPAINT_THREADS", std::to_string(threads).c_str(), 1);

  try {
    if (*render) {
      const auto s = make_scene(render_c);
      const auto geometry = fp::render_geometry(s.mesh, s.rig);
      if (!render_out.empty()) {
        fp::TextureMap tex = render_tex.empty() ? fp::TextureMap(s.config.texture_resolution, {0.5, 0.5, 0.5}, true)
                                                : load_texture_for(s, render_tex);
        const auto sampling = render_bilinear ? fp::Sampling::bilinear : fp::Sampling::nearest;
        fp::save_png(fp::render_views(tex, geometry, s.layout, sampling).assemble(), render_out);
      }
      if (!render_depth.empty() || !render_depth_pfm.empty()) {
        const auto depth = fp::render_depth_grid(s.mesh, s.rig, s.layout).assemble();
        if (!render_depth.empty()) fp::save_png(depth, render_depth);
        if (!render_depth_pfm.empty()) fp::save_pfm(depth, render_depth_pfm);
      }
    } else if (*reproject) {
      const auto s = make_scene(reproj_c);
      const auto grid = fp::GridImage::split(fp::load_png_rgb(reproj_grid), s.layout);
      const auto partials = fp::reproject_grid(grid, s.rig, s.mesh, s.atlas, s.config.reproject);
      for (const auto& p : partials) {
        const auto prefix = reproj_prefix + "_" + std::to_string(p.view_id);
        fp::export_partial(p, prefix);
        std::cout << prefix << ".png covered=" << p.covered.count() << '\n';
      }
    } else if (*fuse) {
      const auto s = make_scene(fuse_c);
      const auto grid = fp::GridImage::split(fp::load_png_rgb(fuse_grid), s.layout);
      const auto partials = fp::reproject_grid(grid, s.rig, s.mesh, s.atlas, s.config.reproject);
      const auto fused = fp::fuse(partials, weights_for(partials, s.atlas, fuse_params, fuse_beta, fuse_t));
      fp::save_texture_png(fused, fuse_out);
      std::cout << "valid texels " << fused.validity.count() << " of " << s.atlas.validity.count() << '\n';
    } else if (*fit) {
      const auto s = make_scene(fit_c);
      const auto gt = load_texture_for(s, fit_gt);
      const auto geometry = fp::render_geometry(s.mesh, s.rig);
      const auto projections = fp::build_rig_projections(s.rig, s.mesh, s.atlas, geometry, s.config.reproject);
      std::mt19937_64 rng(fit_seed);
      std::uniform_real_distribution<double> ut(0.1, 1.0);
      std::vector<fp::WeighterSample> data;
      for (int i = 0; i < fit_samples; ++i) {
        const double t = ut(rng);
        data.push_back({fp::simulate_noisy_partials(gt, geometry, projections, s.layout, t, rng()), gt, t});
      }
      const fp::WeighterObjective objective(data, s.atlas, geometry);
      const auto result = fp::fit_weighter(objective, fp::WeighterParams{}, fit_budget);
      fp::save_params(result.params, fit_out);
      std::cout << "initial loss " << result.trace.front() << "\nfitted loss  " << result.loss << "\nevaluations  "
                << result.evaluations << '\n'
                << fp::params_to_json(result.params);
    } else if (*eval_loss) {
      const auto s = make_scene(loss_c);
      const auto gt = load_texture_for(s, loss_gt);
      const auto geometry = fp::render_geometry(s.mesh, s.rig);
      const auto grid = fp::GridImage::split(fp::load_png_rgb(loss_grid), s.layout);
      const auto partials = fp::reproject_grid(grid, s.rig, s.mesh, s.atlas, s.config.reproject);
      const auto fused = fp::fuse(partials, weights_for(partials, s.atlas, loss_params, loss_beta, loss_t));
      const auto b = fp::total_weighter_loss(partials, fused, gt, geometry, loss_t);
      std::cout << "perceptual " << b.perceptual << "\ncycle      " << b.cycle << "\nsmooth     " << b.smooth
                << "\ntotal      " << b.total << '\n';
    } else if (*embed) {
      fp::require(!embed_text_arg.empty() || !embed_image_arg.empty() || text_opt->count() > 0,
                  "embed needs --text or --image");
      fp::Embedding e;
      if (!embed_image_arg.empty()) {
        const auto img = fp::load_png_rgb(embed_image_arg);
        e = embed_gray ? fp::grayscale_negative(img, embed_dim) : fp::embed_image(img, embed_dim);
      } else {
        e = fp::embed_text(embed_text_arg, embed_dim);
      }
      if (!embed_out.empty()) fp::save_embedding(e, embed_out);
      std::cout << (e.modality == fp::Modality::text ? "text" : "image") << ' ' << e.dimension() << '\n';
      for (double v : e.values) std::cout << std::setprecision(17) << v << '\n';
    } else if (*texture) {
      auto config = tex_c.load();
      if (!tex_out.empty()) config.output_dir = tex_out;
      const auto result = fp::run_pipeline(config);
      for (const auto& a : result.artifacts) std::cout << config.output_dir << '/' << a << '\n';
    } else if (*complete) {
      const auto s = make_scene(comp_c);
      auto partial = load_texture_for(s, comp_in);
      for (std::size_t t = 0; t < partial.texel_count(); ++t)
        if (!s.atlas.validity[t]) partial.validity.set(t, false);
      fp::save_texture_png(fp::complete_texture(partial, s.atlas, s.config.completion), comp_out);
    } else if (*enhance) {
      const auto s = make_scene(enh_c);
      const auto tex = load_texture_for(s, enh_in);
      const auto hi = fp::bake_atlas_maps(s.mesh, s.config.texture_resolution * s.config.enhancement.factor);
      fp::save_texture_png(fp::enhance_texture(tex, hi, s.config.enhancement), enh_out);
    } else if (*eval) {
      const auto config = ev_c.load();
      const auto gt = fp::load_texture_png(ev_gt);
      std::optional<fp::TextureMap> cand;
      if (!ev_candidate.empty()) cand = fp::load_texture_png(ev_candidate);
      const auto report = fp::run_eval(config, gt, cand ? &*cand : nullptr);
      std::cout << report.table();
      if (!ev_report.empty()) {
        std::ofstream out(ev_report);
        fp::require(static_cast<bool>(out), "cannot write report '" + ev_report + "'");
        out << report.key_values();
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "flexpaint: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
