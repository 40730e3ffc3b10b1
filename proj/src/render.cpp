#include "splatstyle/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace splatstyle {
namespace {

constexpr double kNearClip = 1e-2;
constexpr double kSingularDet = 1e-12;
constexpr float kMinAlpha = 1e-5f;         // negligible-contribution cutoff
constexpr float kMinTransmittance = 1e-4f;  // pixel saturated, stop compositing

struct Splat {
  double cx, cy;        // projected mean, pixel coordinates
  double ia, ib, ic;    // inverse 2D covariance [[ia, ib], [ib, ic]]
  double depth;
  int x0, x1, y0, y1;   // inclusive pixel bounds
  float r, g, b;
  float opacity;
};

void check_camera(const Camera& cam) {
  if (cam.width < 1 || cam.height < 1) throw ContractError("image dimensions must be positive");
  if (!cam.orthographic && !(cam.fov_deg > 0.0 && cam.fov_deg < 180.0))
    throw ContractError("vertical fov must lie in (0, 180) degrees");
  if (cam.orthographic && !(cam.ortho_half_height > 0.0))
    throw ContractError("orthographic half-height must be positive");
  const Vec3 forward = cam.look_at - cam.eye;
  if (forward.norm() < 1e-12) throw ContractError("camera eye coincides with look_at");
  if (forward.cross(cam.up).norm() < 1e-12 * forward.norm() * cam.up.norm() ||
      cam.up.norm() < 1e-12)
    throw ContractError("camera up is degenerate with the view direction");
}

}  // namespace

Image render(const GaussianCloud& cloud, const Camera& cam, Exec exec) {
  check_camera(cam);
  const int w = cam.width;
  const int h = cam.height;
  Image image(w, h);

  const Vec3 forward = (cam.look_at - cam.eye).normalized();
  const Vec3 right = forward.cross(cam.up).normalized();
  const Vec3 upv = right.cross(forward);
  Mat3 view;  // world -> view rotation, rows (right, up, forward)
  view.row(0) = right.transpose();
  view.row(1) = upv.transpose();
  view.row(2) = forward.transpose();

  const double half_h = 0.5 * static_cast<double>(h);
  const double focal = cam.orthographic
                           ? half_h / cam.ortho_half_height
                           : half_h / std::tan(0.5 * cam.fov_deg * std::numbers::pi / 180.0);
  const double px_cx = 0.5 * static_cast<double>(w - 1);
  const double px_cy = 0.5 * static_cast<double>(h - 1);

  std::vector<Splat> splats(cloud.size());
  std::vector<std::uint8_t> keep(cloud.size(), 0);
  parallel_for(cloud.size(), exec, [&](std::size_t i) {
    const Gaussian& g = cloud.gaussians[i];
    const Vec3 v = view * (g.position - cam.eye);
    if (v.z() <= kNearClip) return;

    Splat s;
    s.depth = v.z();
    Eigen::Matrix<double, 2, 3> J;
    if (cam.orthographic) {
      s.cx = px_cx + focal * v.x();
      s.cy = px_cy - focal * v.y();
      J << focal, 0.0, 0.0, 0.0, -focal, 0.0;
    } else {
      const double inv_z = 1.0 / v.z();
      s.cx = px_cx + focal * v.x() * inv_z;
      s.cy = px_cy - focal * v.y() * inv_z;
      J << focal * inv_z, 0.0, -focal * v.x() * inv_z * inv_z,  //
          0.0, -focal * inv_z, focal * v.y() * inv_z * inv_z;
    }

    const Mat3 rot = g.rotation.normalized().toRotationMatrix();
    const Vec3 sc = g.scale();
    const Mat3 cov_world = rot * sc.cwiseProduct(sc).asDiagonal() * rot.transpose();
    const Eigen::Matrix2d cov2 = J * (view * cov_world * view.transpose()) * J.transpose();
    double a = cov2(0, 0), bb = cov2(0, 1), c = cov2(1, 1);
    double det = a * c - bb * bb;
    if (det <= kSingularDet) {  // numerically singular footprint: widen slightly
      a += 0.3;
      c += 0.3;
      det = a * c - bb * bb;
      if (det <= 0.0) return;
    }
    s.ia = c / det;
    s.ib = -bb / det;
    s.ic = a / det;

    // 3-sigma extent along each axis of the 2D Gaussian.
    const double rx = 3.0 * std::sqrt(std::max(a, 0.0));
    const double ry = 3.0 * std::sqrt(std::max(c, 0.0));
    s.x0 = std::max(0, static_cast<int>(std::floor(s.cx - rx)));
    s.x1 = std::min(w - 1, static_cast<int>(std::ceil(s.cx + rx)));
    s.y0 = std::max(0, static_cast<int>(std::floor(s.cy - ry)));
    s.y1 = std::min(h - 1, static_cast<int>(std::ceil(s.cy + ry)));
    if (s.x0 > s.x1 || s.y0 > s.y1) return;

    s.r = static_cast<float>(std::clamp(g.color.x(), 0.0, 1.0));
    s.g = static_cast<float>(std::clamp(g.color.y(), 0.0, 1.0));
    s.b = static_cast<float>(std::clamp(g.color.z(), 0.0, 1.0));
    s.opacity = static_cast<float>(std::clamp(g.opacity, 0.0, 1.0));
    if (s.opacity <= 0.0f) return;
    splats[i] = s;
    keep[i] = 1;
  });

  std::vector<int> order;
  order.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (keep[i]) order.push_back(static_cast<int>(i));
  std::sort(order.begin(), order.end(), [&](int lhs, int rhs) {
    if (splats[static_cast<std::size_t>(lhs)].depth != splats[static_cast<std::size_t>(rhs)].depth)
      return splats[static_cast<std::size_t>(lhs)].depth <
             splats[static_cast<std::size_t>(rhs)].depth;
    return lhs < rhs;
  });

  // Front-to-back splat list per row, preserving global depth order.
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(h));
  for (int id : order) {
    const Splat& s = splats[static_cast<std::size_t>(id)];
    for (int y = s.y0; y <= s.y1; ++y) rows[static_cast<std::size_t>(y)].push_back(id);
  }

  parallel_for(static_cast<std::size_t>(h), exec, [&](std::size_t yi) {
    const int y = static_cast<int>(yi);
    std::vector<float> trans(static_cast<std::size_t>(w), 1.0f);
    for (int id : rows[yi]) {
      const Splat& s = splats[static_cast<std::size_t>(id)];
      const double dy = static_cast<double>(y) - s.cy;
      for (int x = s.x0; x <= s.x1; ++x) {
        float& t = trans[static_cast<std::size_t>(x)];
        if (t < kMinTransmittance) continue;
        const double dx = static_cast<double>(x) - s.cx;
        const double e = s.ia * dx * dx + 2.0 * s.ib * dx * dy + s.ic * dy * dy;
        if (e > 9.0) continue;
        const float alpha = s.opacity * static_cast<float>(std::exp(-0.5 * e));
        if (alpha < kMinAlpha) continue;
        const float wgt = t * alpha;
        image.at(x, y, 0) += wgt * s.r;
        image.at(x, y, 1) += wgt * s.g;
        image.at(x, y, 2) += wgt * s.b;
        t *= 1.0f - alpha;
      }
    }
  });
  return image;
}

}  // namespace splatstyle
