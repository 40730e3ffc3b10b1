#pragma once

#include <cstdint>
#include <optional>

#include "splatstyle/types.hpp"

namespace splatstyle {

// Surface cleanup before partitioning: drop translucent floaters by opacity,
// then drop kNN outliers (mean distance to the 8 nearest neighbors above
// median + outlier_sigma * MAD), then optionally subsample uniformly without
// replacement. Survivors keep their input order.
GaussianCloud surface_resample(const GaussianCloud& cloud, double opacity_min, double outlier_sigma,
                               std::optional<std::size_t> target_count = std::nullopt,
                               std::uint64_t seed = 0);

}  // namespace splatstyle
