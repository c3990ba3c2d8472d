#pragma once

#include <cstddef>
#include <vector>

#include "smcforge/raster.hpp"

namespace smcforge::eval {

/// Paired-series summary. Pairs where either side is NaN are dropped before
/// anything is computed.
struct MetricSummary {
    double rmse = 0.0;
    double mae = 0.0;
    double r2 = 0.0;
    double pearson = 0.0;
    std::size_t n = 0;
};

/// rmse = sqrt(mean(e^2)), mae = mean|e|, r2 = 1 - SSE/SST, pearson the
/// usual product-moment coefficient (0 when the prediction is constant).
/// Throws ValidationError on length mismatch, fewer than 2 valid pairs, or
/// zero-variance truth (r2 undefined).
MetricSummary metrics(const std::vector<double>& pred, const std::vector<double>& truth);

/// Algebraic inversion of the C-band forward model:
///   theta = (vv_db + 25 + 4*max(0, ndvi) + 0.15*(inc - 35)) / 40,
/// clipped to [theta_r, theta_s]. NaN in any input propagates.
raster::Raster2D baseline_invert(const raster::Raster2D& vv_db, const raster::Raster2D& ndvi,
                                 const raster::Raster2D& inc_deg, float theta_r = 0.05f,
                                 float theta_s = 0.45f);

}  // namespace smcforge::eval
