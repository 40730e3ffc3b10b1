#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles are
// deliberately naive (exhaustive enumeration, O(n^2) scans, finite
// differences) so they cannot share bugs with the library implementations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "splatstyle/features.hpp"
#include "splatstyle/rng.hpp"
#include "splatstyle/sinkhorn.hpp"
#include "splatstyle/types.hpp"

namespace testsupport {

using namespace splatstyle;

// Exact optimal transport for uniform weights and n == m: minimum over all
// point-to-point assignments of the mean pair cost, by brute enumeration.
inline double exact_assignment_ot(const MatX& x, const MatX& y) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      cost += 0.5 * (x.row(static_cast<Eigen::Index>(i)) - y.row(perm[i])).squaredNorm();
    best = std::min(best, cost / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Large-regularization limit of the divergence: the kernel double sums
// 0.5 MMD^2 with kernel k = -0.5 |x-y|^2, written out directly.
inline double half_mmd_squared(const FeatureCloud& a, const FeatureCloud& b) {
  const auto pair_mean = [](const FeatureCloud& u, const FeatureCloud& v) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < u.points.rows(); ++i)
      for (Eigen::Index j = 0; j < v.points.rows(); ++j)
        sum += u.weights[i] * v.weights[j] * 0.5 * (u.points.row(i) - v.points.row(j)).squaredNorm();
    return sum;
  };
  return pair_mean(a, b) - 0.5 * pair_mean(a, a) - 0.5 * pair_mean(b, b);
}

// Central finite differences of the divergence in a's support points.
inline MatX fd_sd_gradient(const FeatureCloud& a, const FeatureCloud& b,
                           const SinkhornParams& params, double h) {
  MatX grad(a.points.rows(), a.points.cols());
  FeatureCloud probe = a;
  for (Eigen::Index i = 0; i < a.points.rows(); ++i) {
    for (Eigen::Index d = 0; d < a.points.cols(); ++d) {
      probe.points(i, d) = a.points(i, d) + h;
      const double up = sinkhorn_divergence(probe, b, params).sd_value;
      probe.points(i, d) = a.points(i, d) - h;
      const double dn = sinkhorn_divergence(probe, b, params).sd_value;
      probe.points(i, d) = a.points(i, d);
      grad(i, d) = (up - dn) / (2.0 * h);
    }
  }
  return grad;
}

// k nearest stored points by an O(n) scan, (distance^2, index) ascending.
inline std::vector<int> brute_knn(const MatX& pts, const Vec3& q, int k) {
  std::vector<std::pair<double, int>> all;
  all.reserve(static_cast<std::size_t>(pts.rows()));
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    all.emplace_back((pts.row(i).transpose() - q).squaredNorm(), static_cast<int>(i));
  std::sort(all.begin(), all.end());
  std::vector<int> idx;
  for (int i = 0; i < k && i < static_cast<int>(all.size()); ++i) idx.push_back(all[i].second);
  return idx;
}

inline FeatureCloud uniform_cloud(const MatX& points) {
  FeatureCloud fc;
  fc.points = points;
  fc.weights = VecX::Constant(points.rows(), 1.0 / static_cast<double>(points.rows()));
  return fc;
}

inline MatX random_points(std::size_t n, int dim, std::uint64_t seed, double scale = 1.0,
                          const VecX& offset = VecX()) {
  Rng rng(seed);
  MatX pts(static_cast<Eigen::Index>(n), dim);
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (int d = 0; d < dim; ++d)
      pts(i, d) = scale * rng.uniform() + (offset.size() > d ? offset[d] : 0.0);
  return pts;
}

// Ring of n points with radius r in the z = 0 plane, slightly jittered so no
// two points are exactly symmetric.
inline MatX ring_points(std::size_t n, double radius, std::uint64_t seed) {
  Rng rng(seed);
  MatX pts(static_cast<Eigen::Index>(n), 3);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const double angle = 2.0 * 3.14159265358979323846 *
                             (static_cast<double>(i) + 0.2 * (rng.uniform() - 0.5)) /
                             static_cast<double>(n);
    pts.row(i) << radius * std::cos(angle), radius * std::sin(angle), 0.0;
  }
  return pts;
}

// Rotation about a uniformly random axis by an angle uniform in [0, max_deg].
inline Quat bounded_rotation(Rng& rng, double max_deg) {
  Vec3 axis = rng.normal3();
  while (axis.norm() < 1e-12) axis = rng.normal3();
  axis.normalize();
  const double angle = rng.uniform(0.0, max_deg * 3.14159265358979323846 / 180.0);
  return Quat(Eigen::AngleAxisd(angle, axis));
}

// Gaussians spread over the surface of an axis-aligned cube, with a smooth
// two-tone color pattern; a stand-in for a "content" scene.
inline GaussianCloud cube_surface_cloud(std::size_t n, std::uint64_t seed, double half = 1.0) {
  Rng rng(seed);
  GaussianCloud cloud;
  cloud.layout = PlyLayout::standard();
  cloud.gaussians.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Gaussian& g = cloud.gaussians[i];
    const int face = static_cast<int>(rng.index(6));
    Vec3 p(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0, (face % 2 == 0) ? 1.0 : -1.0);
    if (face / 2 == 1) p = Vec3(p.z(), p.x(), p.y());
    if (face / 2 == 2) p = Vec3(p.y(), p.z(), p.x());
    g.position = half * p;
    const double tone = 0.5 + 0.45 * std::sin(3.0 * p.x()) * std::cos(3.0 * p.y());
    g.color = Vec3(tone, 0.4 + 0.2 * tone, 1.0 - tone);
    g.log_scale = Vec3::Constant(std::log(0.05 * half));
    g.rotation = rng.rotation();
    g.opacity = 0.6 + 0.4 * rng.uniform();
  }
  return cloud;
}

// Dense bumpy sheet with a distinct palette; a stand-in for a "style" scene.
inline GaussianCloud bump_field_cloud(std::size_t n, std::uint64_t seed, double extent = 2.0) {
  Rng rng(seed);
  GaussianCloud cloud;
  cloud.layout = PlyLayout::standard();
  cloud.gaussians.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Gaussian& g = cloud.gaussians[i];
    const double x = extent * (2.0 * rng.uniform() - 1.0);
    const double y = extent * (2.0 * rng.uniform() - 1.0);
    const double z = 0.25 * std::sin(2.5 * x) * std::sin(2.5 * y) + 0.02 * rng.normal();
    g.position = Vec3(x, y, z);
    const double ripple = 0.5 + 0.5 * std::sin(4.0 * x + 2.0 * y);
    g.color = Vec3(0.9 * ripple, 0.3 + 0.3 * ripple, 0.2);
    g.log_scale = Vec3::Constant(std::log(0.03 * extent));
    g.rotation = rng.rotation();
    g.opacity = 0.5 + 0.5 * rng.uniform();
  }
  return cloud;
}

}  // namespace testsupport
