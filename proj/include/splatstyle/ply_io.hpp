#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "splatstyle/types.hpp"

namespace splatstyle {

// Standard 3DGS splat PLY: binary little-endian, element "vertex", float32
// properties only. Unknown properties ride along byte-exact.
GaussianCloud load_ply(const std::string& path);
void save_ply(const GaussianCloud& cloud, const std::string& path);

inline double decode_color_component(double f_dc) {
  return std::clamp(0.5 + kShC0 * f_dc, 0.0, 1.0);
}

inline double encode_color_component(double c) { return (c - 0.5) / kShC0; }

inline double decode_opacity(double raw) { return 1.0 / (1.0 + std::exp(-raw)); }

// Logit clamped to +-20 so opacities at exactly 0 or 1 stay finite.
inline double encode_opacity(double opacity) {
  const double p = std::clamp(opacity, 0.0, 1.0);
  if (p <= 0.0) return -20.0;
  if (p >= 1.0) return 20.0;
  return std::clamp(std::log(p / (1.0 - p)), -20.0, 20.0);
}

}  // namespace splatstyle
