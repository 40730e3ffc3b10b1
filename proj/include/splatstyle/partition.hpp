#pragma once

#include <cstdint>
#include <vector>

#include "splatstyle/features.hpp"
#include "splatstyle/parallel.hpp"
#include "splatstyle/types.hpp"

namespace splatstyle {

struct Partition {
  std::vector<int> labels;  // one cluster index in [0, K) per point
  MatX centroids;           // K x d
  int K = 0;
  double inertia = 0.0;  // sum of squared distances to assigned centroids
};

// Lloyd's algorithm with k-means++ seeding. Iterates until the labels stop
// changing or max_iter; empty clusters are reseeded from the point farthest
// from its assigned centroid. Deterministic for a fixed seed under any worker
// count. Ties (nearest centroid, farthest point) break toward the lowest
// index.
Partition kmeans(const FeatureCloud& features, int K, std::uint64_t seed, int max_iter = 100,
                 Exec exec = default_exec());

// Dissolves clusters with fewer than min_size members and reassigns their
// points to the nearest surviving centroid; surviving clusters are renumbered
// in ascending original order and centroids recomputed. Throws
// DegeneracyError when no cluster reaches min_size.
Partition repair_small_clusters(const Partition& p, const FeatureCloud& features,
                                std::size_t min_size = 16, Exec exec = default_exec());

}  // namespace splatstyle
