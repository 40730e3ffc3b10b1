#pragma once

#include <string>
#include <vector>

#include "splatstyle/parallel.hpp"
#include "splatstyle/types.hpp"

namespace splatstyle {

struct Camera {
  Vec3 eye = Vec3(0.0, 0.0, -5.0);
  Vec3 look_at = Vec3::Zero();
  Vec3 up = Vec3(0.0, 1.0, 0.0);
  double fov_deg = 60.0;  // vertical field of view (perspective mode)
  int width = 512;
  int height = 512;
  bool orthographic = false;
  double ortho_half_height = 1.0;  // world units spanned by the upper half view
};

// Row-major RGB, 3 floats per pixel, nominal range [0,1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0.0f) {}
  float& at(int x, int y, int c) {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + static_cast<std::size_t>(c)];
  }
  float at(int x, int y, int c) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + static_cast<std::size_t>(c)];
  }
};

// Deterministic CPU preview: Gaussians are projected to 2D means and
// covariances via the linearized projection of R diag(S)^2 R^T, sorted
// front-to-back by view depth (index breaks ties), and alpha-composited
// per pixel with a 3-sigma cutoff over a black background.
Image render(const GaussianCloud& cloud, const Camera& cam, Exec exec = default_exec());

// 8-bit RGB PNG bytes (sRGB-clamped), deterministic for identical images.
std::vector<std::uint8_t> encode_png(const Image& image);

void save_png(const Image& image, const std::string& path);

}  // namespace splatstyle
