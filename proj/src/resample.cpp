#include "splatstyle/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "splatstyle/knn.hpp"
#include "splatstyle/rng.hpp"

namespace splatstyle {

namespace {

double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (n % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                     v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

}  // namespace

GaussianCloud surface_resample(const GaussianCloud& cloud, double opacity_min, double outlier_sigma,
                               std::optional<std::size_t> target_count, std::uint64_t seed) {
  if (cloud.empty()) throw ContractError("surface_resample: cloud is empty");
  const std::size_t n_in = cloud.size();

  std::vector<int> keep;
  keep.reserve(n_in);
  for (std::size_t i = 0; i < n_in; ++i)
    if (cloud.gaussians[i].opacity >= opacity_min) keep.push_back(static_cast<int>(i));
  const std::size_t after_opacity = keep.size();
  if (keep.empty())
    throw DegeneracyError("surface_resample: all " + std::to_string(n_in) +
                          " gaussians below opacity threshold");

  if (std::isfinite(outlier_sigma) && keep.size() > 1) {
    MatX pos(static_cast<Eigen::Index>(keep.size()), 3);
    for (std::size_t i = 0; i < keep.size(); ++i)
      pos.row(static_cast<Eigen::Index>(i)) = cloud.gaussians[static_cast<std::size_t>(keep[i])].position;
    KdTree tree(pos);

    const int k = std::min<int>(8, static_cast<int>(keep.size()) - 1);
    std::vector<int> nn_idx;
    std::vector<double> nn_d2;
    // query with k+1 to skip the point itself (distance 0, lowest tie index)
    tree.knn_batch(pos, k + 1, nn_idx, nn_d2);

    std::vector<double> mean_dist(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      double sum = 0.0;
      int used = 0;
      for (int j = 0; j < k + 1 && used < k; ++j) {
        const std::size_t at = i * static_cast<std::size_t>(k + 1) + static_cast<std::size_t>(j);
        if (nn_idx[at] == static_cast<int>(i)) continue;
        sum += std::sqrt(nn_d2[at]);
        ++used;
      }
      mean_dist[i] = used > 0 ? sum / used : 0.0;
    }

    std::vector<double> tmp = mean_dist;
    const double med = median_inplace(tmp);
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = std::abs(mean_dist[i] - med);
    const double mad = median_inplace(tmp);
    const double threshold = med + outlier_sigma * mad;

    std::vector<int> filtered;
    filtered.reserve(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (mean_dist[i] <= threshold) filtered.push_back(keep[i]);
    keep.swap(filtered);
  }

  if (keep.empty())
    throw DegeneracyError("surface_resample: no gaussians survive filtering (input " +
                          std::to_string(n_in) + ", after opacity " + std::to_string(after_opacity) + ")");

  if (target_count.has_value() && *target_count < keep.size()) {
    // partial Fisher-Yates, then restore input order
    Rng rng(seed);
    for (std::size_t i = 0; i < *target_count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.index(keep.size() - i));
      std::swap(keep[i], keep[j]);
    }
    keep.resize(*target_count);
    std::sort(keep.begin(), keep.end());
  }

  GaussianCloud out;
  out.layout = cloud.layout;
  out.source_path = cloud.source_path;
  out.gaussians.reserve(keep.size());
  for (int idx : keep) out.gaussians.push_back(cloud.gaussians[static_cast<std::size_t>(idx)]);
  return out;
}

}  // namespace splatstyle
