#include "splatstyle/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "splatstyle/rng.hpp"

namespace splatstyle {
namespace {

constexpr std::size_t kChunk = 4096;

// Nearest centroid by squared distance, lowest index on ties.
void assign_labels(const MatX& pts, const MatX& centroids, std::vector<int>& labels, VecX& dist2,
                   Exec exec) {
  parallel_for(static_cast<std::size_t>(pts.rows()), exec, [&](std::size_t i) {
    const auto row = pts.row(static_cast<Eigen::Index>(i));
    int best = 0;
    double best_d = (centroids.row(0) - row).squaredNorm();
    for (Eigen::Index k = 1; k < centroids.rows(); ++k) {
      const double d = (centroids.row(k) - row).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    labels[i] = best;
    dist2[static_cast<Eigen::Index>(i)] = best_d;
  });
}

// Weighted per-cluster means via fixed-size chunks merged in chunk order, so
// the accumulation order never depends on the worker count. Clusters with no
// mass keep their previous centroid (reseeding handles them).
void update_centroids(const MatX& pts, const VecX& weights, const std::vector<int>& labels, int K,
                      MatX& centroids, std::vector<std::size_t>& counts, Exec exec) {
  const std::size_t n = static_cast<std::size_t>(pts.rows());
  const std::size_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<MatX> sums(nchunks);
  std::vector<VecX> masses(nchunks);
  parallel_for(nchunks, exec, [&](std::size_t c) {
    MatX sum = MatX::Zero(K, pts.cols());
    VecX mass = VecX::Zero(K);
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      sum.row(labels[i]) += weights[idx] * pts.row(idx);
      mass[labels[i]] += weights[idx];
    }
    sums[c] = std::move(sum);
    masses[c] = std::move(mass);
  });
  MatX sum = MatX::Zero(K, pts.cols());
  VecX mass = VecX::Zero(K);
  for (std::size_t c = 0; c < nchunks; ++c) {
    sum += sums[c];
    mass += masses[c];
  }

  counts.assign(static_cast<std::size_t>(K), 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(labels[i])];
  for (Eigen::Index k = 0; k < K; ++k) {
    if (mass[k] > 0.0) centroids.row(k) = sum.row(k) / mass[k];
  }
}

// k-means++: first centroid uniform, then sample proportional to
// weight * squared-distance-to-nearest-chosen.
MatX seed_centroids(const MatX& pts, const VecX& weights, int K, Rng& rng, Exec exec) {
  const auto n = pts.rows();
  MatX centroids(K, pts.cols());
  centroids.row(0) = pts.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
  VecX dmin(n);
  parallel_for(static_cast<std::size_t>(n), exec, [&](std::size_t i) {
    const auto idx = static_cast<Eigen::Index>(i);
    dmin[idx] = (pts.row(idx) - centroids.row(0)).squaredNorm();
  });
  for (int t = 1; t < K; ++t) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += weights[i] * dmin[i];
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double cum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        cum += weights[i] * dmin[i];
        if (cum > u) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // rounding pushed u to the very top; take the last massive entry
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (weights[i] * dmin[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    }
    if (pick < 0) pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    centroids.row(t) = pts.row(pick);
    parallel_for(static_cast<std::size_t>(n), exec, [&](std::size_t i) {
      const auto idx = static_cast<Eigen::Index>(i);
      const double d = (pts.row(idx) - centroids.row(t)).squaredNorm();
      if (d < dmin[idx]) dmin[idx] = d;
    });
  }
  return centroids;
}

}  // namespace

Partition kmeans(const FeatureCloud& features, int K, std::uint64_t seed, int max_iter,
                 Exec exec) {
  const auto n = features.points.rows();
  if (K < 1) throw ContractError("kmeans requires K >= 1");
  if (static_cast<Eigen::Index>(K) > n) {
    throw ContractError("kmeans requires K <= point count (" + std::to_string(K) + " > " +
                        std::to_string(n) + ")");
  }
  if (!features.points.allFinite()) throw NumericError("non-finite clustering features");

  Rng rng(seed);
  Partition p;
  p.K = K;
  p.centroids = seed_centroids(features.points, features.weights, K, rng, exec);
  p.labels.assign(static_cast<std::size_t>(n), -1);

  std::vector<int> prev(p.labels);
  std::vector<std::size_t> counts;
  VecX dist2(n);
  for (int iter = 0; iter < std::max(1, max_iter); ++iter) {
    assign_labels(features.points, p.centroids, p.labels, dist2, exec);
    if (p.labels == prev) break;
    prev = p.labels;
    if (iter + 1 == std::max(1, max_iter)) break;
    update_centroids(features.points, features.weights, p.labels, K, p.centroids, counts, exec);

    // Reseed empty clusters from the farthest point whose donor cluster can
    // spare it; distances are the ones from the assignment just done.
    for (int e = 0; e < K; ++e) {
      if (counts[static_cast<std::size_t>(e)] != 0) continue;
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto donor = static_cast<std::size_t>(p.labels[static_cast<std::size_t>(i)]);
        if (counts[donor] <= 1) continue;
        if (dist2[i] > far_d) {
          far_d = dist2[i];
          far = i;
        }
      }
      if (far < 0) break;
      --counts[static_cast<std::size_t>(p.labels[static_cast<std::size_t>(far)])];
      ++counts[static_cast<std::size_t>(e)];
      p.labels[static_cast<std::size_t>(far)] = e;
      p.centroids.row(e) = features.points.row(far);
      dist2[far] = 0.0;
    }
  }
  p.inertia = dist2.sum();
  return p;
}

Partition repair_small_clusters(const Partition& p, const FeatureCloud& features,
                                std::size_t min_size, Exec exec) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(p.K), 0);
  for (int label : p.labels) ++counts[static_cast<std::size_t>(label)];

  std::vector<int> remap(static_cast<std::size_t>(p.K), -1);
  std::vector<int> survivors;
  for (int k = 0; k < p.K; ++k) {
    if (counts[static_cast<std::size_t>(k)] >= min_size) {
      remap[static_cast<std::size_t>(k)] = static_cast<int>(survivors.size());
      survivors.push_back(k);
    }
  }
  if (survivors.empty()) {
    throw DegeneracyError("all " + std::to_string(p.K) + " clusters below min_size " +
                          std::to_string(min_size));
  }
  if (survivors.size() == static_cast<std::size_t>(p.K)) return p;

  MatX kept(static_cast<Eigen::Index>(survivors.size()), p.centroids.cols());
  for (std::size_t s = 0; s < survivors.size(); ++s)
    kept.row(static_cast<Eigen::Index>(s)) = p.centroids.row(survivors[s]);

  Partition out;
  out.K = static_cast<int>(survivors.size());
  out.labels.assign(p.labels.size(), -1);
  parallel_for(p.labels.size(), exec, [&](std::size_t i) {
    const int mapped = remap[static_cast<std::size_t>(p.labels[i])];
    if (mapped >= 0) {
      out.labels[i] = mapped;
      return;
    }
    const auto row = features.points.row(static_cast<Eigen::Index>(i));
    int best = 0;
    double best_d = (kept.row(0) - row).squaredNorm();
    for (Eigen::Index k = 1; k < kept.rows(); ++k) {
      const double d = (kept.row(k) - row).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    out.labels[i] = best;
  });

  out.centroids = kept;
  std::vector<std::size_t> new_counts;
  update_centroids(features.points, features.weights, out.labels, out.K, out.centroids, new_counts,
                   exec);
  VecX dist2(features.points.rows());
  parallel_for(out.labels.size(), exec, [&](std::size_t i) {
    const auto idx = static_cast<Eigen::Index>(i);
    dist2[idx] = (features.points.row(idx) - out.centroids.row(out.labels[i])).squaredNorm();
  });
  out.inertia = dist2.sum();
  return out;
}

}  // namespace splatstyle
