#include "splatstyle/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "splatstyle/rng.hpp"

namespace splatstyle {
namespace {

// Rotation best aligning p-rows onto q-rows in the least-squares sense:
// SVD of H = P^T Q with the determinant-corrected (reflection-free) recompose.
Mat3 kabsch(const Mat3& H) {
  Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 flip = Mat3::Identity();
  flip(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixV() * flip * svd.matrixU().transpose();
}

MatX transform_points(const MatX& pts, const SimilarityTransform& tr) {
  return ((pts.rowwise() - tr.t.transpose()) * tr.R.toRotationMatrix().transpose()) *
         tr.S.asDiagonal();
}

// Nearest style point per row; returns the summed (non-squared) distances.
double match_nearest(const MatX& y, const KdTree& style, std::vector<int>& match, Exec exec) {
  match.resize(static_cast<std::size_t>(y.rows()));
  VecX dist2(y.rows());
  parallel_for(static_cast<std::size_t>(y.rows()), exec, [&](std::size_t j) {
    const auto idx = static_cast<Eigen::Index>(j);
    double d2 = 0.0;
    match[j] = style.nearest(y.row(idx), &d2);
    dist2[idx] = d2;
  });
  return dist2.cwiseSqrt().sum();
}

}  // namespace

SimilarityTransform fit_similarity(const MatX& cluster, const KdTree& style,
                                   const FitOptions& opts, Exec exec) {
  const Eigen::Index m = cluster.rows();
  if (m < 16) {
    throw ContractError("similarity fit needs at least 16 cluster points, got " +
                        std::to_string(m));
  }
  if (style.size() == 0) throw ContractError("similarity fit needs a nonempty style index");
  if (opts.restarts < 1 || opts.max_iter < 1)
    throw ContractError("fit restarts and max_iter must be at least 1");
  if (!cluster.allFinite()) throw NumericError("non-finite cluster positions");

  const Vec3 cbar = cluster.colwise().mean();
  const MatX centered = cluster.rowwise() - cbar.transpose();
  const double cluster_rms = std::sqrt(centered.rowwise().squaredNorm().mean());
  const MatX& sp = style.points();
  const Vec3 sbar = sp.colwise().mean();
  const double style_rms =
      std::sqrt((sp.rowwise() - sbar.transpose()).rowwise().squaredNorm().mean());

  // Per-axis scales are only identifiable when the cluster has full-rank
  // spread; otherwise (collinear/planar/point-like) fit a single scale.
  const Mat3 cov = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const bool degenerate = eig.eigenvalues()(0) <= 1e-10 * std::max(eig.eigenvalues()(2), 1e-300);

  const double s0 = cluster_rms > 0.0
                        ? std::clamp(style_rms / cluster_rms, opts.s_min, opts.s_max)
                        : 1.0;

  Rng rng(opts.seed);
  SimilarityTransform best;
  best.objective = std::numeric_limits<double>::infinity();
  best.degenerate = degenerate;

  std::vector<int> match;
  MatX q(m, 3);
  for (int r = 0; r < opts.restarts; ++r) {
    SimilarityTransform cur;
    cur.R = r == 0 ? Quat::Identity() : rng.rotation();
    cur.S = Vec3::Constant(s0);
    cur.t = cbar - cur.R.conjugate() * cur.S.cwiseInverse().cwiseProduct(sbar);
    cur.degenerate = degenerate;

    double prev_obj = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < opts.max_iter; ++iter) {
      const double obj = match_nearest(transform_points(cluster, cur), style, match, exec);
      if (prev_obj - obj < opts.tol * std::max(prev_obj, 1e-30)) break;
      prev_obj = obj;
      for (Eigen::Index j = 0; j < m; ++j) q.row(j) = sp.row(match[static_cast<std::size_t>(j)]);

      const Vec3 qbar = q.colwise().mean();
      const MatX qc = q.rowwise() - qbar.transpose();
      SimilarityTransform next = cur;
      // The matches live in the style frame, where the current per-axis scale
      // has stretched the geometry; descale them before the rotation solve or
      // anisotropy biases the cross-covariance away from the true rotation.
      next.R = Quat(kabsch(centered.transpose() *
                           (qc * cur.S.cwiseInverse().asDiagonal())))
                   .normalized();
      const MatX p = centered * next.R.toRotationMatrix().transpose();
      if (degenerate) {
        const double den = p.squaredNorm();
        if (den > 0.0)
          next.S = Vec3::Constant(
              std::clamp(p.cwiseProduct(qc).sum() / den, opts.s_min, opts.s_max));
      } else {
        for (int a = 0; a < 3; ++a) {
          const double den = p.col(a).squaredNorm();
          if (den > 0.0)
            next.S[a] = std::clamp(p.col(a).dot(qc.col(a)) / den, opts.s_min, opts.s_max);
        }
      }
      next.t = cbar - next.R.conjugate() * next.S.cwiseInverse().cwiseProduct(qbar);

      // Accept only if the objective under the frozen correspondences does
      // not increase; refreshed correspondences can then only lower it more.
      const double guarded = (transform_points(cluster, next) - q).rowwise().norm().sum();
      if (guarded > obj) break;
      cur = next;
    }
    cur.objective = match_nearest(transform_points(cluster, cur), style, match, exec);
    if (cur.objective < best.objective) best = cur;
  }
  return best;
}

ClusterAssignment select_style_cluster(const SimilarityTransform& transform, const MatX& cluster,
                                       const KdTree& style, int k, int content_cluster,
                                       Exec exec) {
  if (k < 1) throw ContractError("select_style_cluster requires k >= 1");
  if (cluster.rows() == 0) throw ContractError("select_style_cluster requires a nonempty cluster");

  ClusterAssignment out;
  out.content_cluster = content_cluster;
  out.transform = transform;

  const MatX y = transform_points(cluster, transform);
  std::vector<int> idx;
  std::vector<double> dist2;
  int k_cur = k;
  for (int attempt = 0;; ++attempt) {
    style.knn_batch(y, k_cur, idx, dist2, exec);
    out.style_indices.assign(idx.begin(), idx.end());
    std::sort(out.style_indices.begin(), out.style_indices.end());
    out.style_indices.erase(std::unique(out.style_indices.begin(), out.style_indices.end()),
                            out.style_indices.end());
    out.k_used = k_cur;
    if (out.style_indices.size() >= 16 || attempt == 4 ||
        out.style_indices.size() == static_cast<std::size_t>(style.size()))
      break;
    k_cur *= 2;
  }
  if (out.style_indices.size() < 4) {
    throw SelectionError("cluster " + std::to_string(content_cluster) + " selected only " +
                         std::to_string(out.style_indices.size()) +
                         " style Gaussians (need at least 4)");
  }
  return out;
}

GaussianCloud apply_inverse(const SimilarityTransform& transform,
                            const GaussianCloud& style_subcloud) {
  GaussianCloud out = style_subcloud;
  const Quat r_inv = transform.R.conjugate();
  const Vec3 inv_scale = transform.S.cwiseInverse();
  const double log_lambda = std::log(transform.lambda());
  for (Gaussian& g : out.gaussians) {
    g.position = r_inv * inv_scale.cwiseProduct(g.position) + transform.t;
    g.rotation = (r_inv * g.rotation).normalized();
    g.log_scale.array() -= log_lambda;
    g.dirty = true;
  }
  return out;
}

}  // namespace splatstyle
