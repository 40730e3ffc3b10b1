#pragma once

#include "splatstyle/parallel.hpp"
#include "splatstyle/types.hpp"

namespace splatstyle {

// r bounds the allowed max/min scale ratio per Gaussian; s is the target
// uniform scale in scene units.
struct RegularizerParams {
  double r = 3.0;
  double s = 1.0;
};

// Mean over Gaussians of max(max(S)/min(S), r) - r with S = exp(log_scale):
// zero exactly when every Gaussian's anisotropy ratio is within r.
double aniso_loss(const GaussianCloud& cloud, double r);

// Mean over Gaussians of |S - (s,s,s)|^2.
double uniform_loss(const GaussianCloud& cloud, double s);

// Median of all per-axis scales; the default uniform target.
double median_scale(const GaussianCloud& cloud);

// Direct projection substitute for training with the two losses: Gaussians
// whose scale ratio exceeds r are compressed in log space about their log
// mean so the ratio lands exactly on r (geometric mean preserved). With
// apply_uniform set, scales are then blended halfway toward (s,s,s) in log
// space. aniso_loss of the result is zero.
GaussianCloud project_scales(const GaussianCloud& cloud, const RegularizerParams& params,
                             bool apply_uniform, Exec exec = default_exec());

}  // namespace splatstyle
