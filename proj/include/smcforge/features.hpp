#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include <json.hpp>

#include "smcforge/raster.hpp"

namespace smcforge::features {

/// Per-channel normalization computed over training data, NaN excluded.
struct ChannelStats {
    struct Entry {
        float mean = 0.0f;
        float std = 0.0f;
        bool constant = false;  // std == 0 on training data
    };
    std::map<raster::ChannelId, Entry> entries;

    [[nodiscard]] bool has(raster::ChannelId id) const { return entries.count(id) != 0; }
    [[nodiscard]] const Entry& at(raster::ChannelId id) const;
};

/// Accumulates (value, channel) pairs and finalizes mean/std.
class ChannelStatsBuilder {
public:
    void add(raster::ChannelId id, float value);
    void add_plane(raster::ChannelId id, const raster::Raster2D& plane);
    [[nodiscard]] ChannelStats finalize() const;

private:
    struct Acc {
        double sum = 0.0;
        double sum_sq = 0.0;
        std::uint64_t n = 0;
    };
    std::map<raster::ChannelId, Acc> acc_;
};

/// JSON form: {channel: {"mean": m, "std": s, "constant": b}}.
nlohmann::ordered_json stats_to_json(const ChannelStats& stats);
ChannelStats stats_from_json(const nlohmann::json& j);
void save_stats_json(const ChannelStats& stats, const std::filesystem::path& path);
ChannelStats load_stats_json(const std::filesystem::path& path);

/// (NIR - RED) / (NIR + RED) per pixel; NaN when the denominator is zero or
/// either input is NaN. Output lies in [-1, 1] for nonnegative reflectances.
raster::Raster2D ndvi(const raster::Raster2D& nir, const raster::Raster2D& red);

/// 10*log10(x); values at or below 1e-6 clamp to -60 dB, NaN passes through.
/// Negative input is an error.
raster::Raster2D to_db(const raster::Raster2D& sigma0_linear);

inline constexpr float kDefaultIncidenceRefDeg = 35.0f;

/// Cosine-squared incidence normalization to the reference angle:
/// sigma_ref = sigma_db + 10*log10(cos^2(ref) / cos^2(inc)).
raster::Raster2D incidence_normalize(const raster::Raster2D& sigma_db,
                                     const raster::Raster2D& inc_deg,
                                     float ref_deg = kDefaultIncidenceRefDeg);

inline constexpr float kDefaultCropNdviThreshold = 0.3f;

/// 1 where ndvi >= threshold, 0 below, NaN propagates.
raster::Raster2D crop_mask(const raster::Raster2D& ndvi, float threshold = kDefaultCropNdviThreshold);

/// Seasonal clock: sin/cos of 2*pi*doy/365.25.
struct SeasonalPhase {
    double sin_doy;
    double cos_doy;
};
SeasonalPhase seasonal_phase(double day_of_year);

enum class StackMode : std::uint8_t { AE, FUSED };

/// Planes available for one date, keyed by channel. Radar planes are
/// expected in dB (already incidence-normalized when desired).
using ChannelInputs = std::map<raster::ChannelId, raster::Raster2D>;

struct AssembledStack {
    raster::RasterStack stack;                    // the 14 channels, fixed order, z-scored
    std::vector<raster::ChannelId> imputed;       // channels filled with the training mean
};

/// Builds the fixed 14-channel feature stack for one date.
///  - DOY_SIN / DOY_COS become constant planes from the date's seasonal phase.
///  - RAIN_MM / SMC_LAG come from inputs in FUSED mode and are exactly zero
///    planes in AE mode.
///  - NDVI is computed from NIR and RED when not supplied directly.
///  - A missing channel plane (and any NaN cell) is filled with the training
///    mean, which z-scores to 0; fully imputed channels are recorded.
///  - Every channel is z-scored with the training stats (std 0 maps to 0).
///    A channel with no training statistics at all degrades to an imputed
///    zero plane.
AssembledStack assemble_stack(const ChannelInputs& inputs, std::int64_t date,
                              const ChannelStats& stats, StackMode mode);

}  // namespace smcforge::features
