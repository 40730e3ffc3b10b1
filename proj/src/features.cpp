#include "splatstyle/features.hpp"

#include <algorithm>
#include <cmath>

namespace splatstyle {

double luminance(const Vec3& rgb) {
  const double y = 0.299 * rgb.x() + 0.587 * rgb.y() + 0.114 * rgb.z();
  return std::clamp(y, 0.0, 1.0);
}

FeatureCloud assemble_features(const GaussianCloud& cloud, const FeatureMode& mode,
                               const FeatureCloud* normalize_to) {
  if (cloud.empty()) throw ContractError("assemble_features: cloud is empty");
  if (!(mode.weight >= 0.0) || !std::isfinite(mode.weight))
    throw ContractError("assemble_features: feature weight must be finite and nonnegative");

  const Eigen::Index n = static_cast<Eigen::Index>(cloud.size());
  FeatureCloud out;
  out.points.resize(n, mode.dim());
  out.weights = VecX::Constant(n, 1.0 / static_cast<double>(n));

  if (normalize_to != nullptr) {
    out.frame = normalize_to->frame;
  } else {
    Vec3 center = Vec3::Zero();
    for (const Gaussian& g : cloud.gaussians) center += g.position;
    center /= static_cast<double>(n);
    double ms = 0.0;
    for (const Gaussian& g : cloud.gaussians) ms += (g.position - center).squaredNorm();
    out.frame.center = center;
    out.frame.radius = std::sqrt(ms / static_cast<double>(n));
  }
  if (!(out.frame.radius >= 1e-12))
    throw DegeneracyError("assemble_features: degenerate cloud (RMS radius < 1e-12)");

  for (Eigen::Index i = 0; i < n; ++i) {
    const Gaussian& g = cloud.gaussians[static_cast<std::size_t>(i)];
    out.points.row(i).head<3>() = (g.position - out.frame.center) / out.frame.radius;
    switch (mode.kind) {
      case FeatureKind::Coords:
        break;
      case FeatureKind::CoordsLuminance:
        out.points(i, 3) = mode.weight * luminance(g.color);
        break;
      case FeatureKind::CoordsRGB:
        out.points.row(i).tail<3>() = mode.weight * g.color;
        break;
    }
  }
  return out;
}

void apply_opacity_weights(FeatureCloud& features, const GaussianCloud& cloud) {
  if (features.size() != static_cast<Eigen::Index>(cloud.size()))
    throw ContractError("apply_opacity_weights: size mismatch");
  double total = 0.0;
  for (const Gaussian& g : cloud.gaussians) total += g.opacity;
  if (total <= 0.0) throw DegeneracyError("apply_opacity_weights: zero total opacity");
  for (Eigen::Index i = 0; i < features.size(); ++i)
    features.weights[i] = cloud.gaussians[static_cast<std::size_t>(i)].opacity / total;
}

}  // namespace splatstyle
