#include "smcforge/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "smcforge/errors.hpp"
#include "smcforge/simworld.hpp"

namespace smcforge::eval {

MetricSummary metrics(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) {
        throw ValidationError("metrics: prediction and truth lengths differ (" +
                              std::to_string(pred.size()) + " vs " + std::to_string(truth.size()) +
                              ")");
    }
    std::vector<double> p, t;
    p.reserve(pred.size());
    t.reserve(truth.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (std::isfinite(pred[i]) && std::isfinite(truth[i])) {
            p.push_back(pred[i]);
            t.push_back(truth[i]);
        }
    }
    const std::size_t n = p.size();
    if (n < 2) {
        throw ValidationError("metrics: need at least 2 paired finite values, got " +
                              std::to_string(n));
    }
    bool constant_truth = true;
    for (std::size_t i = 1; i < n && constant_truth; ++i) constant_truth = t[i] == t[0];
    if (constant_truth) {
        throw ValidationError("metrics: truth series has zero variance, r2 is undefined");
    }

    double se = 0.0, ae = 0.0, pm = 0.0, tm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = p[i] - t[i];
        se += e * e;
        ae += std::abs(e);
        pm += p[i];
        tm += t[i];
    }
    pm /= static_cast<double>(n);
    tm /= static_cast<double>(n);

    double sst = 0.0, ssp = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = t[i] - tm;
        const double dp = p[i] - pm;
        sst += dt * dt;
        ssp += dp * dp;
        cov += dp * dt;
    }
    if (sst <= 0.0) {
        throw ValidationError("metrics: truth series has zero variance, r2 is undefined");
    }

    MetricSummary out;
    out.n = n;
    out.rmse = std::sqrt(se / static_cast<double>(n));
    out.mae = ae / static_cast<double>(n);
    out.r2 = 1.0 - se / sst;
    out.pearson = ssp > 0.0 ? cov / std::sqrt(ssp * sst) : 0.0;
    return out;
}

raster::Raster2D baseline_invert(const raster::Raster2D& vv_db, const raster::Raster2D& ndvi,
                                 const raster::Raster2D& inc_deg, float theta_r, float theta_s) {
    if (!(vv_db.geo() == ndvi.geo()) || !(vv_db.geo() == inc_deg.geo())) {
        throw ValidationError("baseline_invert: input grids do not share a geometry");
    }
    raster::Raster2D out = raster::Raster2D::filled(vv_db.geo(), 0.0f);
    for (std::size_t i = 0; i < out.values().size(); ++i) {
        const float vv = vv_db.values()[i];
        const float nd = ndvi.values()[i];
        const float inc = inc_deg.values()[i];
        // std::max(0, NaN) would quietly pick 0; keep NaN vegetation NaN.
        const float veg = std::isnan(nd) ? nd : std::max(0.0f, nd);
        const float theta = (vv - sim::kRadarOffsetDb + sim::kRadarVegetationDb * veg +
                             sim::kRadarIncidenceSlopeDb * (inc - 35.0f)) /
                            sim::kRadarThetaSlopeDb;
        out.values()[i] = std::clamp(theta, theta_r, theta_s);
    }
    return out;
}

}  // namespace smcforge::eval
