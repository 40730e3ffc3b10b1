#include "splatstyle/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace splatstyle {
namespace {

void check_nonempty(const GaussianCloud& cloud) {
  if (cloud.empty()) throw ContractError("regularizer requires a nonempty cloud");
}

}  // namespace

double aniso_loss(const GaussianCloud& cloud, double r) {
  check_nonempty(cloud);
  if (r < 1.0) throw ContractError("anisotropy bound r must be >= 1");
  double sum = 0.0;
  for (const Gaussian& g : cloud.gaussians) {
    // Ratio evaluated in log space: one exp keeps isotropic Gaussians at a
    // ratio of exactly 1 (per-lane exp of equal inputs may differ by an ulp).
    const double ratio = std::exp(g.log_scale.maxCoeff() - g.log_scale.minCoeff());
    sum += std::max(ratio, r) - r;
  }
  return sum / static_cast<double>(cloud.size());
}

double uniform_loss(const GaussianCloud& cloud, double s) {
  check_nonempty(cloud);
  if (!(s > 0.0)) throw ContractError("target scale s must be positive");
  double sum = 0.0;
  for (const Gaussian& g : cloud.gaussians) sum += (g.scale() - Vec3::Constant(s)).squaredNorm();
  return sum / static_cast<double>(cloud.size());
}

double median_scale(const GaussianCloud& cloud) {
  check_nonempty(cloud);
  std::vector<double> scales;
  scales.reserve(cloud.size() * 3);
  for (const Gaussian& g : cloud.gaussians)
    for (int a = 0; a < 3; ++a) scales.push_back(std::exp(g.log_scale[a]));
  const std::size_t mid = scales.size() / 2;
  std::nth_element(scales.begin(), scales.begin() + static_cast<std::ptrdiff_t>(mid),
                   scales.end());
  return scales[mid];
}

GaussianCloud project_scales(const GaussianCloud& cloud, const RegularizerParams& params,
                             bool apply_uniform, Exec exec) {
  check_nonempty(cloud);
  if (params.r < 1.0) throw ContractError("anisotropy bound r must be >= 1");
  if (!(params.s > 0.0)) throw ContractError("target scale s must be positive");

  GaussianCloud out = cloud;
  const double log_r = std::log(params.r);
  const double log_s = std::log(params.s);
  parallel_for(out.size(), exec, [&](std::size_t i) {
    Gaussian& g = out.gaussians[i];
    Vec3 l = g.log_scale;
    const double spread = l.maxCoeff() - l.minCoeff();
    bool changed = false;
    if (spread > log_r) {
      // Compress about the log mean so max-min becomes exactly log r; the
      // geometric mean of the scales is untouched.
      const double mean = l.mean();
      l = Vec3::Constant(mean) + (log_r / spread) * (l - Vec3::Constant(mean));
      changed = true;
    }
    if (apply_uniform) {
      l = 0.5 * (l + Vec3::Constant(log_s));
      changed = true;
    }
    if (changed) {
      g.log_scale = l;
      g.dirty = true;
    }
  });
  return out;
}

}  // namespace splatstyle
