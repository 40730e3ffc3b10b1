#include "splatstyle/knn.hpp"

#include <algorithm>
#include <numeric>

namespace splatstyle {

namespace {
constexpr int kLeafSize = 16;
}

struct NeighborHeap {
  struct Entry {
    double d2;
    int idx;
  };
  // top of the heap is the worst kept neighbor: largest distance, ties to the
  // largest index so a lower-index tie can still displace it
  struct Less {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.d2 < b.d2 || (a.d2 == b.d2 && a.idx < b.idx);
    }
  };

  explicit NeighborHeap(int k) : k(k) { entries.reserve(static_cast<std::size_t>(k)); }

  bool full() const { return static_cast<int>(entries.size()) == k; }
  double worst_d2() const { return entries.front().d2; }

  void offer(double d2, int idx) {
    const Entry e{d2, idx};
    if (!full()) {
      entries.push_back(e);
      std::push_heap(entries.begin(), entries.end(), Less{});
      return;
    }
    const Entry& top = entries.front();
    const bool better = d2 < top.d2 || (d2 == top.d2 && idx < top.idx);
    if (!better) return;
    std::pop_heap(entries.begin(), entries.end(), Less{});
    entries.back() = e;
    std::push_heap(entries.begin(), entries.end(), Less{});
  }

  int k;
  std::vector<Entry> entries;
};

KdTree::KdTree(MatX points) : points_(std::move(points)) {
  if (points_.rows() < 1) throw ContractError("KdTree: need at least one point");
  if (points_.cols() != 3) throw ContractError("KdTree: points must be n x 3");
  order_.resize(static_cast<std::size_t>(points_.rows()));
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(static_cast<std::size_t>(2 * points_.rows() / kLeafSize + 2));
  root_ = build(0, static_cast<int>(points_.rows()));
}

int KdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();

  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  Vec3 lo = points_.row(order_[static_cast<std::size_t>(begin)]);
  Vec3 hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    const Vec3 p = points_.row(order_[static_cast<std::size_t>(i)]);
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const int mid = begin + (end - begin) / 2;
  auto cmp = [&](int a, int b) {
    const double va = points_(a, axis), vb = points_(b, axis);
    return va < vb || (va == vb && a < b);
  };
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, cmp);

  nodes_[id].axis = axis;
  nodes_[id].split = points_(order_[static_cast<std::size_t>(mid)], axis);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(int node, const Vec3& q, int k, NeighborHeap& heap) const {
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  if (nd.axis < 0) {
    for (int i = nd.begin; i < nd.end; ++i) {
      const int idx = order_[static_cast<std::size_t>(i)];
      heap.offer((points_.row(idx).transpose() - q).squaredNorm(), idx);
    }
    return;
  }

  const double diff = q[nd.axis] - nd.split;
  const int near = diff < 0.0 ? nd.left : nd.right;
  const int far = diff < 0.0 ? nd.right : nd.left;

  search(near, q, k, heap);
  // visit the far side on exact equality too: an equidistant lower index may
  // live there
  if (!heap.full() || diff * diff <= heap.worst_d2()) search(far, q, k, heap);
}

void KdTree::knn(const Vec3& q, int k, std::vector<int>& idx, std::vector<double>& dist2) const {
  if (k < 1) throw ContractError("KdTree::knn: k must be >= 1");
  const int k_eff = std::min<int>(k, static_cast<int>(points_.rows()));
  NeighborHeap heap(k_eff);
  search(root_, q, k_eff, heap);

  std::sort(heap.entries.begin(), heap.entries.end(), [](const auto& a, const auto& b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.idx < b.idx);
  });
  idx.resize(heap.entries.size());
  dist2.resize(heap.entries.size());
  for (std::size_t i = 0; i < heap.entries.size(); ++i) {
    idx[i] = heap.entries[i].idx;
    dist2[i] = heap.entries[i].d2;
  }
}

int KdTree::nearest(const Vec3& q, double* dist2_out) const {
  thread_local std::vector<int> idx;
  thread_local std::vector<double> d2;
  knn(q, 1, idx, d2);
  if (dist2_out != nullptr) *dist2_out = d2[0];
  return idx[0];
}

void KdTree::knn_batch(const MatX& queries, int k, std::vector<int>& idx, std::vector<double>& dist2,
                       Exec exec) const {
  const int k_eff = std::min<int>(k, static_cast<int>(points_.rows()));
  const Eigen::Index nq = queries.rows();
  idx.assign(static_cast<std::size_t>(nq) * static_cast<std::size_t>(k_eff), -1);
  dist2.assign(static_cast<std::size_t>(nq) * static_cast<std::size_t>(k_eff), 0.0);

  parallel_for(nq, exec, [&](std::ptrdiff_t i) {
    std::vector<int> qi;
    std::vector<double> qd;
    knn(queries.row(i), k_eff, qi, qd);
    std::copy(qi.begin(), qi.end(), idx.begin() + i * k_eff);
    std::copy(qd.begin(), qd.end(), dist2.begin() + i * k_eff);
  });
}

}  // namespace splatstyle
