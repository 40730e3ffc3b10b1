#pragma once

#include <cstdint>
#include <vector>

#include "splatstyle/knn.hpp"
#include "splatstyle/parallel.hpp"
#include "splatstyle/types.hpp"

namespace splatstyle {

// Constrained similarity map x -> diag(S) * R * (x - t) taking content-frame
// coordinates into the style frame.
struct SimilarityTransform {
  Vec3 t = Vec3::Zero();
  Quat R = Quat::Identity();
  Vec3 S = Vec3::Ones();
  double objective = 0.0;  // sum over cluster points of the nearest-style distance
  bool degenerate = false;

  Vec3 apply(const Vec3& x) const { return S.asDiagonal() * (R * (x - t)); }
  // Isotropic part of S; the only scale factor baked into Gaussian shapes.
  double lambda() const { return std::cbrt(S.x() * S.y() * S.z()); }
};

struct ClusterAssignment {
  int content_cluster = -1;
  SimilarityTransform transform;
  std::vector<int> style_indices;  // sorted ascending, deduplicated
  int k_used = 0;
};

struct FitOptions {
  int restarts = 8;
  int max_iter = 50;
  double tol = 1e-5;  // relative objective decrease that counts as converged
  double s_min = 0.25;
  double s_max = 4.0;
  std::uint64_t seed = 0;
};

// ICP-style alternation: nearest-style correspondences, then closed-form
// (t, R, S) — R by SVD of the cross-covariance with reflection guard, per-axis
// S clamped to [s_min, s_max], t from matched centroids. An update is only
// accepted if it does not increase the fixed-correspondence objective, so the
// objective is non-increasing across iterations. Restarts: identity rotation
// plus seeded random rotations; lowest final objective wins. Rank-deficient
// clusters (e.g. collinear) fall back to an isotropic S and set `degenerate`.
SimilarityTransform fit_similarity(const MatX& cluster_positions, const KdTree& style_index,
                                   const FitOptions& opts = {}, Exec exec = default_exec());

// Union over cluster points of the k nearest style indices to the transformed
// point. If the union has fewer than 16 members, k doubles (at most 4 times)
// and the selection reruns; fewer than 4 indices after that is a selection
// error naming the cluster.
ClusterAssignment select_style_cluster(const SimilarityTransform& transform,
                                       const MatX& cluster_positions, const KdTree& style_index,
                                       int k = 3, int content_cluster = -1,
                                       Exec exec = default_exec());

// Maps a style sub-cloud back into the content frame: positions get
// R^T diag(S)^-1 x + t, orientations are left-composed with R^T, and
// log-scales shift by -log lambda (isotropic shrink only; the anisotropy of S
// is not baked into individual Gaussian shapes).
GaussianCloud apply_inverse(const SimilarityTransform& transform,
                            const GaussianCloud& style_subcloud);

}  // namespace splatstyle
