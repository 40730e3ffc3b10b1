#pragma once

#include "splatstyle/types.hpp"

namespace splatstyle {

enum class FeatureKind { Coords, CoordsLuminance, CoordsRGB };

// Matching-feature layout fed to the transport engine: normalized coordinates
// plus, optionally, a weighted luminance channel (d=4) or weighted RGB (d=6).
struct FeatureMode {
  FeatureKind kind = FeatureKind::Coords;
  double weight = 0.0;  // channel weight; unused for Coords

  static FeatureMode coords() { return {FeatureKind::Coords, 0.0}; }
  static FeatureMode coords_luminance(double w) { return {FeatureKind::CoordsLuminance, w}; }
  static FeatureMode coords_rgb(double w) { return {FeatureKind::CoordsRGB, w}; }

  int dim() const {
    switch (kind) {
      case FeatureKind::Coords: return 3;
      case FeatureKind::CoordsLuminance: return 4;
      default: return 6;
    }
  }
};

// Centering/scaling applied to coordinates so a cluster pair shares one frame.
struct NormFrame {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;  // RMS distance to center
};

struct FeatureCloud {
  MatX points;   // n x d
  VecX weights;  // nonnegative, sums to 1
  NormFrame frame;

  Eigen::Index size() const { return points.rows(); }
  int dim() const { return static_cast<int>(points.cols()); }
};

// Rec.601 luma; components expected in [0,1].
double luminance(const Vec3& rgb);

// Coordinates centered at the cloud centroid and divided by the RMS radius;
// when `normalize_to` is given its frame is reused so both clouds live in one
// space. Extra channels are the mode weight times luminance/RGB. Weights are
// uniform 1/n.
FeatureCloud assemble_features(const GaussianCloud& cloud, const FeatureMode& mode,
                               const FeatureCloud* normalize_to = nullptr);

// Optional opacity-proportional weighting (uniform weights are the default).
void apply_opacity_weights(FeatureCloud& features, const GaussianCloud& cloud);

}  // namespace splatstyle
