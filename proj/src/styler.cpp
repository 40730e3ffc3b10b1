#include "splatstyle/styler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>

#include "splatstyle/knn.hpp"
#include "splatstyle/partition.hpp"
#include "splatstyle/resample.hpp"
#include "splatstyle/rng.hpp"

namespace splatstyle {
namespace {

// Optimizable color channel(s) implied by the feature mode, in [0,1].
MatX extract_aux(const GaussianCloud& cloud, FeatureMode mode) {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  switch (mode.kind) {
    case FeatureKind::Coords:
      return MatX(n, 0);
    case FeatureKind::CoordsLuminance: {
      MatX aux(n, 1);
      for (Eigen::Index i = 0; i < n; ++i)
        aux(i, 0) = luminance(cloud.gaussians[static_cast<std::size_t>(i)].color);
      return aux;
    }
    case FeatureKind::CoordsRGB: {
      MatX aux(n, 3);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Vec3 c = cloud.gaussians[static_cast<std::size_t>(i)].color;
        aux.row(i) = c.transpose().cwiseMax(0.0).cwiseMin(1.0);
      }
      return aux;
    }
  }
  throw ContractError("unknown feature mode");
}

MatX state_features(const MatX& positions, const MatX& aux, double weight) {
  MatX x(positions.rows(), 3 + aux.cols());
  x.leftCols(3) = positions;
  if (aux.cols() > 0) x.rightCols(aux.cols()) = weight * aux;
  return x;
}

// Mean distance from each point to its k nearest others, via a fresh tree.
VecX mean_knn_distance(const MatX& pts, int k, Exec exec) {
  const KdTree tree(pts);
  std::vector<int> idx;
  std::vector<double> dist2;
  tree.knn_batch(pts, k + 1, idx, dist2, exec);
  const int stride = std::min<int>(k + 1, static_cast<int>(pts.rows()));
  VecX mean = VecX::Zero(pts.rows());
  parallel_for(static_cast<std::size_t>(pts.rows()), exec, [&](std::size_t i) {
    double sum = 0.0;
    int used = 0;
    for (int j = 0; j < stride && used < k; ++j) {
      const std::size_t at = i * static_cast<std::size_t>(stride) + static_cast<std::size_t>(j);
      if (idx[at] == static_cast<int>(i)) continue;  // skip the query point itself
      sum += std::sqrt(dist2[at]);
      ++used;
    }
    if (used > 0) mean[static_cast<Eigen::Index>(i)] = sum / used;
  });
  return mean;
}

MatX energy_gradient(const MatX& initial, const MatX& current, const std::vector<int>& graph,
                     int k) {
  MatX grad = MatX::Zero(current.rows(), 3);
  for (Eigen::Index g = 0; g < current.rows(); ++g) {
    for (int j = 0; j < k; ++j) {
      const int h = graph[static_cast<std::size_t>(g) * static_cast<std::size_t>(k) +
                          static_cast<std::size_t>(j)];
      const Vec3 diff = current.row(g) - current.row(h);
      const double d = diff.norm();
      const double d0 = (initial.row(g) - initial.row(h)).norm();
      if (d <= 0.0 || d == d0) continue;  // subgradient 0 at ties and coincidence
      const Vec3 term = ((d > d0) ? 1.0 : -1.0) / d * diff;
      grad.row(g) += term.transpose();
      grad.row(h) -= term.transpose();
    }
  }
  return grad;
}

SimilarityTransform identity_transform() { return SimilarityTransform{}; }

}  // namespace

GaussianCloud subset_cloud(const GaussianCloud& cloud, const std::vector<int>& indices) {
  GaussianCloud out;
  out.layout = cloud.layout;
  out.source_path = cloud.source_path;
  out.gaussians.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= cloud.size())
      throw ContractError("subset index out of range");
    out.gaussians.push_back(cloud.gaussians[static_cast<std::size_t>(idx)]);
  }
  return out;
}

ClusterFlowState make_flow_state(const GaussianCloud& fragment, FeatureMode mode,
                                 const NormFrame& frame) {
  if (fragment.size() < 4) throw ContractError("flow state needs at least 4 Gaussians");
  if (!(frame.radius > 0.0)) throw ContractError("normalization frame has zero radius");

  ClusterFlowState state;
  state.fragment = fragment;
  state.mode = mode;
  state.frame = frame;
  const auto p = static_cast<Eigen::Index>(fragment.size());
  state.positions.resize(p, 3);
  for (Eigen::Index i = 0; i < p; ++i) {
    state.positions.row(i) =
        (fragment.gaussians[static_cast<std::size_t>(i)].position - frame.center).transpose() /
        frame.radius;
  }
  if (!state.positions.allFinite()) throw NumericError("non-finite fragment positions");
  state.aux = extract_aux(fragment, mode);
  state.initial_positions = state.positions;

  state.k_neighbors = static_cast<int>(std::min<Eigen::Index>(8, p - 1));
  state.neighbor_graph.assign(
      static_cast<std::size_t>(p) * static_cast<std::size_t>(state.k_neighbors), 0);
  const KdTree tree(state.positions);
  std::vector<int> idx;
  std::vector<double> dist2;
  tree.knn_batch(state.positions, state.k_neighbors + 1, idx, dist2, Exec::Serial);
  const int stride = std::min<int>(state.k_neighbors + 1, static_cast<int>(p));
  for (Eigen::Index i = 0; i < p; ++i) {
    int used = 0;
    for (int j = 0; j < stride && used < state.k_neighbors; ++j) {
      const int cand = idx[static_cast<std::size_t>(i) * static_cast<std::size_t>(stride) +
                           static_cast<std::size_t>(j)];
      if (cand == static_cast<int>(i)) continue;
      state.neighbor_graph[static_cast<std::size_t>(i) *
                               static_cast<std::size_t>(state.k_neighbors) +
                           static_cast<std::size_t>(used)] = cand;
      ++used;
    }
    // Fewer distinct neighbors than k (heavy duplicates): pad with the last.
    for (; used < state.k_neighbors && used > 0; ++used) {
      state.neighbor_graph[static_cast<std::size_t>(i) *
                               static_cast<std::size_t>(state.k_neighbors) +
                           static_cast<std::size_t>(used)] =
          state.neighbor_graph[static_cast<std::size_t>(i) *
                                   static_cast<std::size_t>(state.k_neighbors) +
                               static_cast<std::size_t>(used - 1)];
    }
  }
  return state;
}

double surface_energy(const ClusterFlowState& state) {
  double e = 0.0;
  const int k = state.k_neighbors;
  for (Eigen::Index g = 0; g < state.positions.rows(); ++g) {
    for (int j = 0; j < k; ++j) {
      const int h = state.neighbor_graph[static_cast<std::size_t>(g) * static_cast<std::size_t>(k) +
                                         static_cast<std::size_t>(j)];
      const double d0 = (state.initial_positions.row(g) - state.initial_positions.row(h)).norm();
      const double d = (state.positions.row(g) - state.positions.row(h)).norm();
      e += std::abs(d0 - d);
    }
  }
  return e;
}

MatX surface_energy_gradient(const ClusterFlowState& state) {
  return energy_gradient(state.initial_positions, state.positions, state.neighbor_graph,
                         state.k_neighbors);
}

ClusterFlowState flow_cluster(ClusterFlowState state, const FeatureCloud& target,
                              const StylizationConfig& cfg, Exec exec) {
  const auto p = static_cast<Eigen::Index>(state.size());
  if (p < 1) throw ContractError("flow requires a nonempty state");
  if (3 + state.aux.cols() != target.dim())
    throw ContractError("state and target feature dimensions differ");
  if (cfg.steps < 0 || !(cfg.lr > 0.0)) throw ContractError("invalid flow configuration");

  // A non-finite target cannot yield a finite divergence or gradient; treat it
  // as a cluster-level failure (initial state, flagged) rather than throwing.
  if (!target.points.allFinite() || !target.weights.allFinite()) {
    state.positions = state.initial_positions;
    state.aborted = true;
    state.sd_history.clear();
    state.steps_run = 0;
    return state;
  }

  SinkhornParams sp;
  sp.gamma = cfg.gamma;
  sp.max_iter = cfg.sinkhorn_max_iter;
  sp.tol = cfg.sinkhorn_tol;
  SinkhornFlowSolver solver(target, sp, exec);

  const MatX aux0 = state.aux;
  const double w = state.mode.weight;
  FeatureCloud cur;
  cur.frame = state.frame;
  cur.weights = VecX::Constant(p, 1.0 / static_cast<double>(p));

  MatX m_pos = MatX::Zero(p, 3), v_pos = MatX::Zero(p, 3);
  MatX m_aux = MatX::Zero(p, state.aux.cols()), v_aux = MatX::Zero(p, state.aux.cols());
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  MatX best_pos = state.positions, best_aux = state.aux;
  double best_sd = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  bool aborted = false;

  MatX grad_feat;
  for (int t = 0; t <= cfg.steps; ++t) {
    cur.points = state_features(state.positions, state.aux, w);
    const bool want_grad = t < cfg.steps;
    double sd = 0.0;
    try {
      sd = solver.evaluate(cur, want_grad ? &grad_feat : nullptr);
    } catch (const NumericError&) {
      aborted = true;
      break;
    }
    if (!std::isfinite(sd)) {
      aborted = true;
      break;
    }
    history.push_back(sd);
    if (sd < best_sd) {
      best_sd = sd;
      best_pos = state.positions;
      best_aux = state.aux;
    }
    if (!want_grad) break;

    MatX grad_pos = grad_feat.leftCols(3);
    if (cfg.surface_energy_weight > 0.0) {
      grad_pos += cfg.surface_energy_weight *
                  energy_gradient(state.initial_positions, state.positions, state.neighbor_graph,
                                  state.k_neighbors);
    }
    MatX grad_aux = state.aux.cols() > 0 ? MatX(w * grad_feat.rightCols(state.aux.cols()))
                                         : MatX(p, 0);
    if (!grad_pos.allFinite() || !grad_aux.allFinite()) {
      aborted = true;
      break;
    }

    const double phase =
        cfg.steps > 1 ? static_cast<double>(t) / static_cast<double>(cfg.steps - 1) : 1.0;
    const double lr_t = cfg.lr * (0.1 + 0.45 * (1.0 + std::cos(phase * 3.14159265358979323846)));
    const double bc1 = 1.0 - std::pow(kBeta1, t + 1);
    const double bc2 = 1.0 - std::pow(kBeta2, t + 1);

    m_pos = kBeta1 * m_pos + (1.0 - kBeta1) * grad_pos;
    v_pos = kBeta2 * v_pos + (1.0 - kBeta2) * grad_pos.cwiseProduct(grad_pos);
    state.positions.array() -=
        lr_t * (m_pos.array() / bc1) / ((v_pos.array() / bc2).sqrt() + kEps);
    if (state.aux.cols() > 0) {
      m_aux = kBeta1 * m_aux + (1.0 - kBeta1) * grad_aux;
      v_aux = kBeta2 * v_aux + (1.0 - kBeta2) * grad_aux.cwiseProduct(grad_aux);
      state.aux.array() -= lr_t * (m_aux.array() / bc1) / ((v_aux.array() / bc2).sqrt() + kEps);
      state.aux = state.aux.cwiseMax(0.0).cwiseMin(1.0);
    }
  }

  if (aborted) {
    state.positions = state.initial_positions;
    state.aux = aux0;
    state.aborted = true;
  } else {
    state.positions = best_pos;
    state.aux = best_aux;
  }
  state.sd_history = std::move(history);
  state.steps_run = cfg.steps;
  return state;
}

GaussianCloud writeback_aux(const ClusterFlowState& state, FeatureMode mode) {
  GaussianCloud out = state.fragment;
  const auto p = static_cast<Eigen::Index>(state.size());
  for (Eigen::Index i = 0; i < p; ++i) {
    Gaussian& g = out.gaussians[static_cast<std::size_t>(i)];
    g.position = state.frame.center + state.frame.radius * state.positions.row(i).transpose();
    g.dirty = true;

    if (mode.kind == FeatureKind::CoordsLuminance) {
      const double lum_old = luminance(g.color);
      const double lum_new = state.aux(i, 0);
      const double max_channel = g.color.maxCoeff();
      double factor = lum_new / std::max(lum_old, 1e-4);
      factor = max_channel > 0.0 ? std::min(factor, 1.0 / max_channel) : 0.0;
      const Vec3 next = (factor * g.color).cwiseMax(0.0).cwiseMin(1.0);
      if (next != g.color) {
        g.color = next;
        g.color_dirty = true;
      }
    } else if (mode.kind == FeatureKind::CoordsRGB) {
      const Vec3 next = state.aux.row(i).transpose().cwiseMax(0.0).cwiseMin(1.0);
      if (next != g.color) {
        g.color = next;
        g.color_dirty = true;
      }
    }
  }
  return out;
}

GaussianCloud adjust_scales(const ClusterFlowState& state, GaussianCloud fragment, int k,
                            std::pair<double, double> clamp, Exec exec) {
  if (k < 1) throw ContractError("scale adjustment requires k >= 1");
  if (fragment.size() != state.size())
    throw ContractError("fragment and flow state sizes differ");
  const auto p = static_cast<Eigen::Index>(state.size());
  if (p < 2) return fragment;

  const int k_eff = static_cast<int>(std::min<Eigen::Index>(k, p - 1));
  const VecX before = mean_knn_distance(state.initial_positions, k_eff, exec);
  const VecX after = mean_knn_distance(state.positions, k_eff, exec);
  for (Eigen::Index i = 0; i < p; ++i) {
    double factor = 1.0;
    if (before[i] > 1e-30) factor = std::clamp(after[i] / before[i], clamp.first, clamp.second);
    if (factor != 1.0) {
      Gaussian& g = fragment.gaussians[static_cast<std::size_t>(i)];
      g.log_scale.array() += std::log(factor);
      g.dirty = true;
    }
  }
  return fragment;
}

std::pair<GaussianCloud, StylizationReport> stylize_scene(const GaussianCloud& content,
                                                          const GaussianCloud& style,
                                                          const StylizationConfig& cfg,
                                                          Exec exec) {
  if (content.empty() || style.empty())
    throw ContractError("stylization requires nonempty content and style clouds");
  if (cfg.K < 1 || cfg.knn_k < 1 || !(cfg.gamma > 0.0) || !(cfg.lr > 0.0) || cfg.steps < 0 ||
      cfg.surface_energy_weight < 0.0)
    throw ContractError("invalid stylization configuration");

  const auto t_start = std::chrono::steady_clock::now();
  StylizationReport report;
  report.content_size = static_cast<int>(content.size());
  report.style_size = static_cast<int>(style.size());

  const GaussianCloud resampled =
      surface_resample(content, cfg.opacity_min, cfg.outlier_sigma, std::nullopt, cfg.seed);
  report.resampled_size = static_cast<int>(resampled.size());

  const FeatureCloud cluster_features =
      assemble_features(resampled, FeatureMode::coords_rgb(cfg.kmeans_color_weight));
  Partition part = kmeans(cluster_features, cfg.K, cfg.seed, cfg.kmeans_max_iter, exec);
  part = repair_small_clusters(part, cluster_features, cfg.min_cluster_size, exec);
  const int K = part.K;
  report.K = K;

  std::vector<std::vector<int>> members(static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < part.labels.size(); ++i)
    members[static_cast<std::size_t>(part.labels[i])].push_back(static_cast<int>(i));

  MatX style_positions = style.positions();
  const KdTree style_tree(std::move(style_positions));

  std::vector<GaussianCloud> fragments(static_cast<std::size_t>(K));
  std::vector<ClusterReport> rows(static_cast<std::size_t>(K));

  parallel_for_dynamic(static_cast<std::size_t>(K), exec, [&](std::size_t ci) {
    ClusterReport& row = rows[ci];
    row.cluster = static_cast<int>(ci);
    const GaussianCloud cluster_cloud = subset_cloud(resampled, members[ci]);
    row.content_size = static_cast<int>(cluster_cloud.size());
    const MatX cluster_pos = cluster_cloud.positions();

    GaussianCloud fragment;
    bool have_fragment = false;
    try {
      FitOptions fit = cfg.fit;
      fit.seed = derive_seed(cfg.seed, ci + 1);
      SimilarityTransform transform;
      try {
        transform = fit_similarity(cluster_pos, style_tree, fit, exec);
      } catch (const std::exception&) {
        transform = identity_transform();  // degraded but still selectable
      }
      const ClusterAssignment assignment = select_style_cluster(
          transform, cluster_pos, style_tree, cfg.knn_k, static_cast<int>(ci), exec);
      row.k_used = assignment.k_used;
      row.fit_objective = transform.objective;
      row.degenerate_fit = transform.degenerate;
      row.style_indices = assignment.style_indices;

      fragment = apply_inverse(transform, subset_cloud(style, assignment.style_indices));
      row.fragment_size = static_cast<int>(fragment.size());
      have_fragment = true;

      const FeatureCloud target = assemble_features(cluster_cloud, cfg.feature_mode);
      ClusterFlowState state = make_flow_state(fragment, cfg.feature_mode, target.frame);
      row.energy_before = surface_energy(state);
      state = flow_cluster(std::move(state), target, cfg, exec);
      if (state.aborted) throw NumericError("non-finite gradient, cluster aborted");

      row.initial_sd = state.sd_history.empty() ? 0.0 : state.sd_history.front();
      row.final_sd = state.sd_history.empty()
                         ? 0.0
                         : *std::min_element(state.sd_history.begin(), state.sd_history.end());
      row.steps = state.steps_run;
      row.energy_after = surface_energy(state);

      GaussianCloud out = writeback_aux(state, cfg.feature_mode);
      out = adjust_scales(state, std::move(out), cfg.scale_adjust_k, cfg.scale_adjust_clamp, exec);
      fragments[ci] = std::move(out);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      if (have_fragment) fragments[ci] = std::move(fragment);
    }
    std::fprintf(stderr, "cluster %zu/%d sd0=%.6g sd1=%.6g steps=%d%s\n", ci + 1, K,
                 row.initial_sd, row.final_sd, row.steps, row.failed ? " [failed]" : "");
  });

  int failed = 0;
  for (const ClusterReport& row : rows)
    if (row.failed) ++failed;
  report.failed_clusters = failed;
  if (4 * failed >= K) {
    throw PipelineError("stylization failed on " + std::to_string(failed) + " of " +
                        std::to_string(K) + " clusters");
  }

  GaussianCloud out;
  out.layout = style.layout;
  for (int ci = 0; ci < K; ++ci) {
    const GaussianCloud& frag = fragments[static_cast<std::size_t>(ci)];
    out.gaussians.insert(out.gaussians.end(), frag.gaussians.begin(), frag.gaussians.end());
  }
  if (out.empty()) throw PipelineError("stylization produced no Gaussians");

  for (ClusterReport& row : rows) {
    report.initial_loss += row.initial_sd;
    report.final_loss += row.final_sd;
  }
  report.clusters = std::move(rows);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(out), report};
}

}  // namespace splatstyle
