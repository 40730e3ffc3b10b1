// Command-line front door: stylize, partition, register, divergence,
// regularize, preview, info. Exit codes: 0 success, 2 validation error,
// 3 runtime/pipeline error.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "splatstyle/features.hpp"
#include "splatstyle/knn.hpp"
#include "splatstyle/parallel.hpp"
#include "splatstyle/partition.hpp"
#include "splatstyle/ply_io.hpp"
#include "splatstyle/registration.hpp"
#include "splatstyle/regularize.hpp"
#include "splatstyle/render.hpp"
#include "splatstyle/resample.hpp"
#include "splatstyle/rng.hpp"
#include "splatstyle/sinkhorn.hpp"
#include "splatstyle/styler.hpp"

namespace {

using nlohmann::json;
using namespace splatstyle;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

FeatureMode parse_mode(const std::string& name, double weight) {
  if (name == "coords") return FeatureMode::coords();
  if (name == "coords_luminance") return FeatureMode::coords_luminance(weight);
  if (name == "coords_rgb") return FeatureMode::coords_rgb(weight);
  throw ContractError("unknown feature mode '" + name +
                      "' (expected coords, coords_luminance or coords_rgb)");
}

std::string mode_name(const FeatureMode& mode) {
  switch (mode.kind) {
    case FeatureKind::Coords: return "coords";
    case FeatureKind::CoordsLuminance: return "coords_luminance";
    case FeatureKind::CoordsRGB: return "coords_rgb";
  }
  return "coords";
}

// Full run configuration: stylization parameters plus the CLI-only fields.
struct RunConfig {
  std::string content, style, output;
  int workers = 1;
  int verbosity = 1;
  StylizationConfig styl;
  std::string feature_mode_name = "coords_luminance";
  double feature_weight = 0.3;
};

// The JSON schema mirrors the flags one-to-one; unknown keys are rejected so
// typos fail loudly instead of silently running defaults.
void apply_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open config file " + path);
  json doc = json::parse(in);  // throws json::parse_error on bad syntax
  if (!doc.is_object()) throw ContractError("config root must be a JSON object");

  const auto get = [&doc](const char* key, auto& slot) {
    if (doc.contains(key)) {
      doc.at(key).get_to(slot);
      doc.erase(key);
    }
  };
  get("content", rc.content);
  get("style", rc.style);
  get("output", rc.output);
  get("workers", rc.workers);
  get("verbosity", rc.verbosity);
  get("seed", rc.styl.seed);
  get("K", rc.styl.K);
  get("gamma", rc.styl.gamma);
  get("feature_mode", rc.feature_mode_name);
  get("feature_weight", rc.feature_weight);
  get("knn_k", rc.styl.knn_k);
  get("steps", rc.styl.steps);
  get("lr", rc.styl.lr);
  get("surface_energy_weight", rc.styl.surface_energy_weight);
  get("scale_adjust_min", rc.styl.scale_adjust_clamp.first);
  get("scale_adjust_max", rc.styl.scale_adjust_clamp.second);
  get("opacity_min", rc.styl.opacity_min);
  get("outlier_sigma", rc.styl.outlier_sigma);
  get("kmeans_color_weight", rc.styl.kmeans_color_weight);
  get("kmeans_max_iter", rc.styl.kmeans_max_iter);
  get("min_cluster_size", rc.styl.min_cluster_size);
  get("fit_restarts", rc.styl.fit.restarts);
  get("fit_max_iter", rc.styl.fit.max_iter);
  get("fit_tol", rc.styl.fit.tol);
  get("scale_min", rc.styl.fit.s_min);
  get("scale_max", rc.styl.fit.s_max);
  get("scale_adjust_k", rc.styl.scale_adjust_k);
  get("sinkhorn_max_iter", rc.styl.sinkhorn_max_iter);
  get("sinkhorn_tol", rc.styl.sinkhorn_tol);
  if (!doc.empty())
    throw ContractError("unknown config key '" + doc.begin().key() + "' in " + path);
}

json config_json(const RunConfig& rc) {
  return json{{"content", rc.content},
              {"style", rc.style},
              {"output", rc.output},
              {"workers", rc.workers},
              {"verbosity", rc.verbosity},
              {"seed", rc.styl.seed},
              {"K", rc.styl.K},
              {"gamma", rc.styl.gamma},
              {"feature_mode", rc.feature_mode_name},
              {"feature_weight", rc.feature_weight},
              {"knn_k", rc.styl.knn_k},
              {"steps", rc.styl.steps},
              {"lr", rc.styl.lr},
              {"surface_energy_weight", rc.styl.surface_energy_weight},
              {"scale_adjust_min", rc.styl.scale_adjust_clamp.first},
              {"scale_adjust_max", rc.styl.scale_adjust_clamp.second},
              {"opacity_min", rc.styl.opacity_min},
              {"outlier_sigma", rc.styl.outlier_sigma},
              {"kmeans_color_weight", rc.styl.kmeans_color_weight},
              {"kmeans_max_iter", rc.styl.kmeans_max_iter},
              {"min_cluster_size", rc.styl.min_cluster_size},
              {"fit_restarts", rc.styl.fit.restarts},
              {"fit_max_iter", rc.styl.fit.max_iter},
              {"fit_tol", rc.styl.fit.tol},
              {"scale_min", rc.styl.fit.s_min},
              {"scale_max", rc.styl.fit.s_max},
              {"scale_adjust_k", rc.styl.scale_adjust_k},
              {"sinkhorn_max_iter", rc.styl.sinkhorn_max_iter},
              {"sinkhorn_tol", rc.styl.sinkhorn_tol}};
}

json report_json(const StylizationReport& rep) {
  json clusters = json::array();
  for (const ClusterReport& row : rep.clusters) {
    clusters.push_back(json{{"cluster", row.cluster},
                            {"content_size", row.content_size},
                            {"fragment_size", row.fragment_size},
                            {"k_used", row.k_used},
                            {"fit_objective", row.fit_objective},
                            {"degenerate_fit", row.degenerate_fit},
                            {"initial_sd", row.initial_sd},
                            {"final_sd", row.final_sd},
                            {"energy_before", row.energy_before},
                            {"energy_after", row.energy_after},
                            {"steps", row.steps},
                            {"failed", row.failed},
                            {"error", row.error},
                            {"style_indices", row.style_indices}});
  }
  return json{{"summary",
               {{"content_size", rep.content_size},
                {"resampled_size", rep.resampled_size},
                {"style_size", rep.style_size},
                {"K", rep.K},
                {"failed_clusters", rep.failed_clusters},
                {"initial_loss", rep.initial_loss},
                {"final_loss", rep.final_loss},
                {"wall_seconds", rep.wall_seconds}}},
              {"clusters", clusters}};
}

Vec3 parse_vec3(const std::vector<double>& v, const char* flag) {
  if (v.size() != 3) throw ContractError(std::string(flag) + " needs exactly 3 numbers");
  return Vec3(v[0], v[1], v[2]);
}

// Deterministic subsample to at most cap points (positions + colors survive).
GaussianCloud cap_cloud(const GaussianCloud& cloud, std::size_t cap, std::uint64_t seed) {
  if (cloud.size() <= cap) return cloud;
  std::vector<std::uint32_t> pick(cloud.size());
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = static_cast<std::uint32_t>(i);
  Rng rng(derive_seed(seed, 0x5b5e7));
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t j = i + rng.index(pick.size() - i);
    std::swap(pick[i], pick[j]);
  }
  pick.resize(cap);
  std::sort(pick.begin(), pick.end());
  GaussianCloud out;
  out.layout = cloud.layout;
  out.gaussians.reserve(cap);
  for (std::uint32_t idx : pick) out.gaussians.push_back(cloud.gaussians[idx]);
  return out;
}

int cmd_stylize(const RunConfig& rc) {
  RunConfig cfg = rc;
  if (cfg.content == cfg.style || cfg.content == cfg.output || cfg.style == cfg.output)
    throw ContractError("content, style and output paths must be distinct");
  cfg.styl.feature_mode = parse_mode(cfg.feature_mode_name, cfg.feature_weight);

  const GaussianCloud content = load_ply(cfg.content);
  const GaussianCloud style = load_ply(cfg.style);
  auto [out, report] = stylize_scene(content, style, cfg.styl);
  save_ply(out, cfg.output);

  json doc = report_json(report);
  doc["config"] = config_json(cfg);
  const std::string report_path = cfg.output + ".report.json";
  std::ofstream rep(report_path);
  if (!rep) throw IoError("cannot write " + report_path);
  rep << doc.dump(2) << "\n";
  if (cfg.verbosity > 0) {
    std::fprintf(stderr, "wrote %s (%zu Gaussians) and %s\n", cfg.output.c_str(), out.size(),
                 report_path.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-splat scene stylization via entropic optimal transport"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string config_path;

  // Shared flags; each subcommand picks the ones it needs.
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", rc.styl.seed, "global RNG seed");
    cmd->add_option("--workers", rc.workers, "worker thread count (>=1)");
    cmd->add_option("-v,--verbosity", rc.verbosity, "log verbosity (0 quiet)");
  };

  CLI::App* stylize = app.add_subcommand("stylize", "stylize a content scene with a style scene");
  stylize->add_option("--config", config_path, "JSON config file (flags override it)");
  stylize->add_option("--content", rc.content, "content PLY path");
  stylize->add_option("--style", rc.style, "style PLY path");
  stylize->add_option("--output", rc.output, "output PLY path");
  stylize->add_option("-K,--clusters", rc.styl.K, "content cluster count");
  stylize->add_option("--gamma", rc.styl.gamma, "entropic regularization (normalized units)");
  stylize->add_option("--feature-mode", rc.feature_mode_name,
                      "coords | coords_luminance | coords_rgb");
  stylize->add_option("--feature-weight", rc.feature_weight, "color channel weight");
  stylize->add_option("--knn-k", rc.styl.knn_k, "style selection neighbors");
  stylize->add_option("--steps", rc.styl.steps, "flow steps per cluster");
  stylize->add_option("--lr", rc.styl.lr, "flow learning rate");
  stylize->add_option("--surface-energy-weight", rc.styl.surface_energy_weight,
                      "rigidity regularizer weight");
  stylize->add_option("--opacity-min", rc.styl.opacity_min, "resampling opacity floor");
  stylize->add_option("--outlier-sigma", rc.styl.outlier_sigma, "resampling MAD multiplier");
  stylize->add_option("--fit-restarts", rc.styl.fit.restarts, "registration restarts");
  stylize->add_option("--min-cluster-size", rc.styl.min_cluster_size, "smallest allowed cluster");
  stylize->add_option("--kmeans-color-weight", rc.styl.kmeans_color_weight,
                      "RGB weight when clustering");
  stylize->add_option("--sinkhorn-max-iter", rc.styl.sinkhorn_max_iter, "transport solver cap");
  stylize->add_option("--sinkhorn-tol", rc.styl.sinkhorn_tol, "transport solver tolerance");
  add_common(stylize);

  CLI::App* partition_cmd = app.add_subcommand("partition", "cluster a scene and dump labels");
  std::string part_input, part_output;
  int part_k = 400;
  double part_weight = 0.3;
  partition_cmd->add_option("--input", part_input, "PLY path")->required();
  partition_cmd->add_option("-K,--clusters", part_k, "cluster count");
  partition_cmd->add_option("--color-weight", part_weight, "RGB feature weight");
  partition_cmd->add_option("--output", part_output, "labels JSONL path (default stdout)");
  add_common(partition_cmd);

  CLI::App* register_cmd =
      app.add_subcommand("register", "fit per-cluster similarity transforms into a style scene");
  std::string reg_content, reg_style, reg_output;
  int reg_k = 50;
  int reg_knn = 3;
  register_cmd->add_option("--content", reg_content, "content PLY path")->required();
  register_cmd->add_option("--style", reg_style, "style PLY path")->required();
  register_cmd->add_option("-K,--clusters", reg_k, "cluster count");
  register_cmd->add_option("--knn-k", reg_knn, "selection neighbors");
  register_cmd->add_option("--output", reg_output, "assignment JSONL path (default stdout)");
  add_common(register_cmd);

  CLI::App* divergence_cmd =
      app.add_subcommand("divergence", "Sinkhorn divergence between two scenes");
  std::string div_a, div_b;
  double div_gamma = 0.05;
  std::size_t div_cap = 5000;
  divergence_cmd->add_option("--a", div_a, "first PLY path")->required();
  divergence_cmd->add_option("--b", div_b, "second PLY path")->required();
  divergence_cmd->add_option("--gamma", div_gamma, "entropic regularization");
  divergence_cmd->add_option("--feature-mode", rc.feature_mode_name,
                             "coords | coords_luminance | coords_rgb");
  divergence_cmd->add_option("--feature-weight", rc.feature_weight, "color channel weight");
  divergence_cmd->add_option("--cap", div_cap, "subsample cap per cloud");
  add_common(divergence_cmd);

  CLI::App* regularize_cmd =
      app.add_subcommand("regularize", "project Gaussian scales and report the losses");
  std::string regz_input, regz_output;
  double regz_r = 3.0;
  double regz_s = 0.0;  // 0 = use the median scale
  bool regz_uniform = false;
  regularize_cmd->add_option("--input", regz_input, "PLY path")->required();
  regularize_cmd->add_option("--output", regz_output, "projected PLY path");
  regularize_cmd->add_option("--r", regz_r, "max anisotropy ratio");
  regularize_cmd->add_option("--s", regz_s, "uniform target scale (default: median)");
  regularize_cmd->add_flag("--uniform", regz_uniform, "blend toward the uniform target");
  add_common(regularize_cmd);

  CLI::App* preview_cmd = app.add_subcommand("preview", "render a PNG preview");
  std::string prev_input, prev_output;
  std::vector<double> prev_eye{0.0, 0.0, -5.0};
  std::vector<double> prev_look{0.0, 0.0, 0.0};
  std::vector<double> prev_up{0.0, 1.0, 0.0};
  double prev_fov = 60.0;
  std::vector<int> prev_size{512, 512};
  preview_cmd->add_option("--input", prev_input, "PLY path")->required();
  preview_cmd->add_option("--output", prev_output, "PNG path")->required();
  preview_cmd->add_option("--eye", prev_eye, "camera position x y z")->expected(3);
  preview_cmd->add_option("--look-at", prev_look, "camera target x y z")->expected(3);
  preview_cmd->add_option("--up", prev_up, "camera up x y z")->expected(3);
  preview_cmd->add_option("--fov", prev_fov, "vertical field of view, degrees");
  preview_cmd->add_option("--size", prev_size, "width height")->expected(2);
  add_common(preview_cmd);

  CLI::App* info_cmd = app.add_subcommand("info", "print scene statistics");
  std::string info_input;
  info_cmd->add_option("--input", info_input, "PLY path")->required();
  add_common(info_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }

  try {
    if (*stylize && !config_path.empty()) {
      // File first, then re-apply any explicitly passed flags on top.
      RunConfig from_file;
      apply_config_file(from_file, config_path);
      const auto keep = [&](const char* flag, auto member) {
        if (stylize->count(flag) > 0) from_file.*member = rc.*member;
      };
      keep("--content", &RunConfig::content);
      keep("--style", &RunConfig::style);
      keep("--output", &RunConfig::output);
      keep("--workers", &RunConfig::workers);
      keep("--verbosity", &RunConfig::verbosity);
      keep("--feature-mode", &RunConfig::feature_mode_name);
      keep("--feature-weight", &RunConfig::feature_weight);
      const auto keep_styl = [&](const char* flag, auto member) {
        if (stylize->count(flag) > 0) from_file.styl.*member = rc.styl.*member;
      };
      keep_styl("--seed", &StylizationConfig::seed);
      keep_styl("--clusters", &StylizationConfig::K);
      keep_styl("--gamma", &StylizationConfig::gamma);
      keep_styl("--knn-k", &StylizationConfig::knn_k);
      keep_styl("--steps", &StylizationConfig::steps);
      keep_styl("--lr", &StylizationConfig::lr);
      keep_styl("--surface-energy-weight", &StylizationConfig::surface_energy_weight);
      keep_styl("--opacity-min", &StylizationConfig::opacity_min);
      keep_styl("--outlier-sigma", &StylizationConfig::outlier_sigma);
      keep_styl("--min-cluster-size", &StylizationConfig::min_cluster_size);
      keep_styl("--kmeans-color-weight", &StylizationConfig::kmeans_color_weight);
      keep_styl("--sinkhorn-max-iter", &StylizationConfig::sinkhorn_max_iter);
      keep_styl("--sinkhorn-tol", &StylizationConfig::sinkhorn_tol);
      if (stylize->count("--fit-restarts") > 0) from_file.styl.fit.restarts = rc.styl.fit.restarts;
      rc = from_file;
    }
    if (rc.workers < 1) throw ContractError("worker count must be >= 1");
    set_worker_count(rc.workers);

    if (*stylize) {
      if (rc.content.empty()) throw ContractError("missing required field: content");
      if (rc.style.empty()) throw ContractError("missing required field: style");
      if (rc.output.empty()) throw ContractError("missing required field: output");
      return cmd_stylize(rc);
    }

    if (*partition_cmd) {
      const GaussianCloud cloud = load_ply(part_input);
      const FeatureCloud features = assemble_features(cloud, FeatureMode::coords_rgb(part_weight));
      const Partition part = kmeans(features, part_k, rc.styl.seed);
      std::ofstream file;
      std::ostream* out = &std::cout;
      if (!part_output.empty()) {
        file.open(part_output);
        if (!file) throw IoError("cannot write " + part_output);
        out = &file;
      }
      for (std::size_t i = 0; i < part.labels.size(); ++i)
        *out << json{{"index", i}, {"label", part.labels[i]}}.dump() << "\n";
      json centroids = json::array();
      for (Eigen::Index k = 0; k < part.centroids.rows(); ++k) {
        json row = json::array();
        for (Eigen::Index d = 0; d < part.centroids.cols(); ++d) row.push_back(part.centroids(k, d));
        centroids.push_back(row);
      }
      *out << json{{"K", part.K}, {"inertia", part.inertia}, {"centroids", centroids}}.dump()
           << "\n";
      return kExitOk;
    }

    if (*register_cmd) {
      const GaussianCloud content = load_ply(reg_content);
      const GaussianCloud style = load_ply(reg_style);
      const FeatureCloud features = assemble_features(content, FeatureMode::coords_rgb(0.3));
      Partition part = kmeans(features, reg_k, rc.styl.seed);
      part = repair_small_clusters(part, features);
      std::vector<std::vector<int>> members(static_cast<std::size_t>(part.K));
      for (std::size_t i = 0; i < part.labels.size(); ++i)
        members[static_cast<std::size_t>(part.labels[i])].push_back(static_cast<int>(i));
      const KdTree style_tree(style.positions());

      std::ofstream file;
      std::ostream* out = &std::cout;
      if (!reg_output.empty()) {
        file.open(reg_output);
        if (!file) throw IoError("cannot write " + reg_output);
        out = &file;
      }
      for (int ci = 0; ci < part.K; ++ci) {
        const GaussianCloud cluster = subset_cloud(content, members[static_cast<std::size_t>(ci)]);
        FitOptions fit;
        fit.seed = derive_seed(rc.styl.seed, static_cast<std::uint64_t>(ci) + 1);
        const SimilarityTransform tr = fit_similarity(cluster.positions(), style_tree, fit);
        const ClusterAssignment sel =
            select_style_cluster(tr, cluster.positions(), style_tree, reg_knn, ci);
        *out << json{{"cluster", ci},
                     {"t", {tr.t.x(), tr.t.y(), tr.t.z()}},
                     {"R", {tr.R.w(), tr.R.x(), tr.R.y(), tr.R.z()}},
                     {"S", {tr.S.x(), tr.S.y(), tr.S.z()}},
                     {"objective", tr.objective},
                     {"degenerate", tr.degenerate},
                     {"selected", sel.style_indices.size()}}
                    .dump()
             << "\n";
      }
      return kExitOk;
    }

    if (*divergence_cmd) {
      const GaussianCloud a = cap_cloud(load_ply(div_a), div_cap, rc.styl.seed);
      const GaussianCloud b = cap_cloud(load_ply(div_b), div_cap, rc.styl.seed);
      const FeatureMode mode = parse_mode(rc.feature_mode_name, rc.feature_weight);
      // Both clouds share the first cloud's normalization frame so the
      // divergence is measured in one consistent coordinate system.
      const FeatureCloud fa = assemble_features(a, mode);
      const FeatureCloud fb = assemble_features(b, mode, &fa);
      SinkhornParams params;
      params.gamma = div_gamma;
      const DivergenceReport rep = sinkhorn_divergence(fa, fb, params);
      std::printf("%.6f\n", rep.sd_value);
      if (rc.verbosity > 1) {
        std::fprintf(stderr, "cross=%.9g self_a=%.9g self_b=%.9g iters=%d/%d/%d\n",
                     rep.cross.value, rep.self_a.value, rep.self_b.value, rep.cross.iterations,
                     rep.self_a.iterations, rep.self_b.iterations);
      }
      return kExitOk;
    }

    if (*regularize_cmd) {
      const GaussianCloud cloud = load_ply(regz_input);
      RegularizerParams params;
      params.r = regz_r;
      params.s = regz_s > 0.0 ? regz_s : median_scale(cloud);
      std::printf("before aniso=%.9g uniform=%.9g\n", aniso_loss(cloud, params.r),
                  uniform_loss(cloud, params.s));
      const GaussianCloud projected = project_scales(cloud, params, regz_uniform);
      std::printf("after  aniso=%.9g uniform=%.9g\n", aniso_loss(projected, params.r),
                  uniform_loss(projected, params.s));
      if (!regz_output.empty()) save_ply(projected, regz_output);
      return kExitOk;
    }

    if (*preview_cmd) {
      const GaussianCloud cloud = load_ply(prev_input);
      Camera cam;
      cam.eye = parse_vec3(prev_eye, "--eye");
      cam.look_at = parse_vec3(prev_look, "--look-at");
      cam.up = parse_vec3(prev_up, "--up");
      cam.fov_deg = prev_fov;
      cam.width = prev_size.at(0);
      cam.height = prev_size.at(1);
      save_png(render(cloud, cam), prev_output);
      return kExitOk;
    }

    if (*info_cmd) {
      const GaussianCloud cloud = load_ply(info_input);
      const MatX pos = cloud.positions();
      const Vec3 lo = pos.colwise().minCoeff();
      const Vec3 hi = pos.colwise().maxCoeff();
      std::vector<double> scales;
      scales.reserve(cloud.size() * 3);
      double opacity_sum = 0.0;
      for (const Gaussian& g : cloud.gaussians) {
        for (int a = 0; a < 3; ++a) scales.push_back(std::exp(g.log_scale[a]));
        opacity_sum += g.opacity;
      }
      std::sort(scales.begin(), scales.end());
      std::printf("count %zu\n", cloud.size());
      std::printf("bbox min %.6g %.6g %.6g\n", lo.x(), lo.y(), lo.z());
      std::printf("bbox max %.6g %.6g %.6g\n", hi.x(), hi.y(), hi.z());
      std::printf("scale min %.6g median %.6g max %.6g\n", scales.front(),
                  scales[scales.size() / 2], scales.back());
      std::printf("opacity mean %.6g\n", opacity_sum / static_cast<double>(cloud.size()));
      return kExitOk;
    }
  } catch (const ContractError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitValidation;
}
