#pragma once

#include <vector>

#include "splatstyle/parallel.hpp"
#include "splatstyle/types.hpp"

namespace splatstyle {

// Exact k-nearest-neighbor index over 3D points. Ties at equal distance
// resolve to the lowest point index, so query results are a pure function of
// the point set.
class KdTree {
 public:
  explicit KdTree(MatX points);

  Eigen::Index size() const { return points_.rows(); }
  Vec3 point(int i) const { return points_.row(i); }
  const MatX& points() const { return points_; }

  // k nearest neighbors of q sorted ascending by (distance^2, index).
  // Returns min(k, size()) results.
  void knn(const Vec3& q, int k, std::vector<int>& idx, std::vector<double>& dist2) const;

  int nearest(const Vec3& q, double* dist2_out = nullptr) const;

  // One row per query; idx/dist2 are row-major query-count x k_eff.
  void knn_batch(const MatX& queries, int k, std::vector<int>& idx, std::vector<double>& dist2,
                 Exec exec = default_exec()) const;

 private:
  struct Node {
    double split = 0.0;
    int axis = -1;  // -1 marks a leaf
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into order_
  };

  int build(int begin, int end);
  void search(int node, const Vec3& q, int k, struct NeighborHeap& heap) const;

  MatX points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace splatstyle
