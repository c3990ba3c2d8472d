#include "smcforge/models/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "smcforge/dates.hpp"
#include "smcforge/errors.hpp"

namespace smcforge::models {

using raster::ChannelId;
using raster::Raster2D;

namespace {

// EO channels that come straight from (forward-filled) scene stacks.
constexpr std::array<ChannelId, 10> kSceneChannels = {
    ChannelId::VV_DB, ChannelId::VH_DB, ChannelId::HH_DB,  ChannelId::HV_DB, ChannelId::INC_DEG,
    ChannelId::RED,   ChannelId::GREEN, ChannelId::BLUE,   ChannelId::NIR,   ChannelId::NDVI,
};

bool is_radar_sigma(ChannelId id) {
    return id == ChannelId::VV_DB || id == ChannelId::VH_DB || id == ChannelId::HH_DB ||
           id == ChannelId::HV_DB;
}

/// Channel planes usable on one day: forward-filled scene channels (radar
/// normalized to the reference incidence angle using its own stack's
/// geometry), plus the day's rain as a constant plane.
features::ChannelInputs day_inputs(const ingest::AlignedDataset& aligned,
                                   const raster::SceneSeries& scenes, std::size_t d,
                                   const raster::GridGeo& geo) {
    features::ChannelInputs inputs;
    for (ChannelId id : kSceneChannels) {
        const std::int32_t s = aligned.channel_source[d][static_cast<std::size_t>(id)];
        if (s < 0) continue;
        const raster::RasterStack& stack = scenes.stacks[static_cast<std::size_t>(s)];
        const Raster2D* plane = stack.find(id);
        if (plane == nullptr) continue;
        if (is_radar_sigma(id)) {
            if (const Raster2D* inc = stack.find(ChannelId::INC_DEG); inc != nullptr) {
                inputs.emplace(id, features::incidence_normalize(*plane, *inc));
                continue;
            }
        }
        inputs.emplace(id, *plane);
    }
    inputs.emplace(ChannelId::RAIN_MM, Raster2D::filled(geo, aligned.weather[d].rain_mm));
    return inputs;
}

nn::Tensor<float> stack_to_tensor(const raster::RasterStack& stack) {
    const raster::GridGeo& geo = stack.channels.front().second.geo();
    nn::Tensor<float> t({stack.channels.size(), geo.height, geo.width});
    std::size_t offset = 0;
    for (const auto& [id, plane] : stack.channels) {
        std::copy(plane.values().begin(), plane.values().end(), t.data.begin() + offset);
        offset += plane.size();
    }
    return t;
}

/// Most recent non-missing sensor value strictly before day d, or NaN.
float lag_value(const ingest::AlignedDataset& aligned, std::size_t site, std::size_t d) {
    for (std::size_t back = d; back-- > 0;) {
        if (aligned.site_flag[site][back] != ingest::SmcFlag::MISSING) {
            return aligned.site_smc[site][back];
        }
    }
    return std::numeric_limits<float>::quiet_NaN();
}

}  // namespace

SplitSpec make_split(std::size_t n_days, std::size_t n_sites, double holdout_day_fraction,
                     std::size_t holdout_site_every, double train_fraction) {
    if (n_days == 0) throw ValidationError("make_split: empty timeline");
    if (holdout_day_fraction < 0.0 || holdout_day_fraction >= 1.0) {
        throw ValidationError("make_split: holdout day fraction must be in [0, 1)");
    }
    if (train_fraction <= 0.0 || train_fraction > 1.0) {
        throw ValidationError("make_split: train fraction must be in (0, 1]");
    }
    SplitSpec split;
    const auto holdout_days =
        static_cast<std::size_t>(std::llround(holdout_day_fraction * static_cast<double>(n_days)));
    split.holdout_day_start = n_days - holdout_days;

    const auto span = static_cast<double>(split.holdout_day_start);
    auto train_days = static_cast<std::size_t>(std::llround(train_fraction * span));
    train_days = std::max<std::size_t>(train_days, 1);
    split.train_day_start = split.holdout_day_start - train_days;

    for (std::size_t s = 0; s < n_sites; ++s) {
        if (holdout_site_every > 0 && (s + 1) % holdout_site_every == 0) {
            split.holdout_sites.push_back(s);
        } else {
            split.train_sites.push_back(s);
        }
    }
    return split;
}

FeatureData build_feature_data(const ingest::AlignedDataset& aligned,
                               const raster::SceneSeries& scenes,
                               const raster::SceneSeries* truth, std::size_t stats_day_lo,
                               std::size_t stats_day_hi, bool zero_lag) {
    if (aligned.n_days() == 0) throw ValidationError("build_feature_data: empty aligned dataset");
    if (stats_day_lo >= stats_day_hi || stats_day_hi > aligned.n_days()) {
        throw ValidationError("build_feature_data: bad stats day range");
    }

    FeatureData data;
    data.geo = scenes.geo();
    data.days = aligned.days;
    const std::size_t n_days = aligned.n_days();
    const std::size_t n_sites = aligned.sites.size();

    // Pass 1: normalization statistics over the training slice only.
    {
        features::ChannelStatsBuilder builder;
        for (std::size_t d = stats_day_lo; d < stats_day_hi; ++d) {
            features::ChannelInputs inputs = day_inputs(aligned, scenes, d, data.geo);
            for (const auto& [id, plane] : inputs) {
                if (id == ChannelId::RAIN_MM) continue;  // scalar per day, added below
                builder.add_plane(id, plane);
            }
            if (inputs.count(ChannelId::NDVI) == 0 && inputs.count(ChannelId::NIR) != 0 &&
                inputs.count(ChannelId::RED) != 0) {
                builder.add_plane(ChannelId::NDVI, features::ndvi(inputs.at(ChannelId::NIR),
                                                                  inputs.at(ChannelId::RED)));
            }
            const features::SeasonalPhase phase =
                features::seasonal_phase(dates::day_of_year(aligned.days[d]));
            builder.add(ChannelId::DOY_SIN, static_cast<float>(phase.sin_doy));
            builder.add(ChannelId::DOY_COS, static_cast<float>(phase.cos_doy));
            builder.add(ChannelId::RAIN_MM, aligned.weather[d].rain_mm);
            for (std::size_t s = 0; s < n_sites; ++s) {
                const float lag = lag_value(aligned, s, d);
                if (std::isfinite(lag)) builder.add(ChannelId::SMC_LAG, lag);
            }
        }
        data.stats = builder.finalize();
    }

    // Index truth stacks by timestamp.
    std::map<std::int64_t, const raster::RasterStack*> truth_by_day;
    if (truth != nullptr) {
        for (const auto& stack : truth->stacks) truth_by_day[stack.timestamp] = &stack;
        data.has_truth = true;
    }

    data.ae_frames.reserve(n_days);
    data.truth_maps.resize(n_days);
    data.truth_mask.resize(n_days);
    data.site_steps.assign(n_sites, std::vector<nn::Tensor<float>>(n_days));
    data.site_target.assign(n_sites, std::vector<float>(n_days));

    // Pass 2: per-day frames, truth maps, and site vectors.
    for (std::size_t d = 0; d < n_days; ++d) {
        const features::ChannelInputs inputs = day_inputs(aligned, scenes, d, data.geo);

        const features::AssembledStack ae =
            features::assemble_stack(inputs, aligned.days[d], data.stats, features::StackMode::AE);
        data.ae_frames.push_back(stack_to_tensor(ae.stack));

        if (truth != nullptr) {
            nn::Tensor<float> map({1, data.geo.height, data.geo.width});
            nn::Tensor<float> mask(map.shape);
            if (const auto it = truth_by_day.find(aligned.days[d]); it != truth_by_day.end()) {
                if (const Raster2D* plane = it->second->find(ChannelId::SMC_MAP);
                    plane != nullptr) {
                    for (std::size_t i = 0; i < plane->values().size(); ++i) {
                        const float v = plane->values()[i];
                        map.data[i] = std::isfinite(v) ? v : 0.0f;
                        mask.data[i] = std::isfinite(v) ? 1.0f : 0.0f;
                    }
                }
            }
            data.truth_maps[d] = std::move(map);
            data.truth_mask[d] = std::move(mask);
        }

        const features::AssembledStack fused = features::assemble_stack(
            inputs, aligned.days[d], data.stats, features::StackMode::FUSED);
        const auto& lag_stats = data.stats.has(ChannelId::SMC_LAG)
                                    ? data.stats.at(ChannelId::SMC_LAG)
                                    : features::ChannelStats::Entry{};
        for (std::size_t s = 0; s < n_sites; ++s) {
            nn::Tensor<float> vec({raster::kFeatureChannelCount});
            const std::uint32_t px = aligned.sites[s].px;
            const std::uint32_t py = aligned.sites[s].py;
            for (std::size_t c = 0; c < raster::kFeatureChannelCount; ++c) {
                const ChannelId id = fused.stack.channels[c].first;
                if (id == ChannelId::SMC_LAG) {
                    if (!zero_lag) {
                        const float lag = lag_value(aligned, s, d);
                        if (std::isfinite(lag) && !lag_stats.constant && lag_stats.std > 0.0f) {
                            vec.data[c] = (lag - lag_stats.mean) / lag_stats.std;
                        }
                    }
                    continue;
                }
                const Raster2D patch =
                    raster::extract_patch(fused.stack.channels[c].second, px, py, 3);
                vec.data[c] = patch.mean_valid().value_or(0.0f);
            }
            data.site_steps[s][d] = std::move(vec);

            data.site_target[s][d] = aligned.site_flag[s][d] == ingest::SmcFlag::MISSING
                                         ? std::numeric_limits<float>::quiet_NaN()
                                         : aligned.site_smc[s][d];
        }
    }
    return data;
}

std::vector<std::size_t> train_anchors(const SplitSpec& split, std::size_t t_in, std::size_t k) {
    std::vector<std::size_t> anchors;
    if (split.holdout_day_start < k + 1) return anchors;
    const std::size_t last = split.holdout_day_start - 1 - k;  // a + k < holdout start
    for (std::size_t a = split.train_day_start + t_in - 1; a <= last; ++a) anchors.push_back(a);
    return anchors;
}

std::vector<std::size_t> holdout_anchors(const SplitSpec& split, std::size_t n_days,
                                         std::size_t t_in, std::size_t k) {
    std::vector<std::size_t> anchors;
    if (n_days < k + 1 || split.holdout_day_start == 0) return anchors;
    const std::size_t first =
        std::max(split.holdout_day_start - 1, t_in - 1);  // targets start in the holdout
    for (std::size_t a = first; a + k < n_days; ++a) anchors.push_back(a);
    return anchors;
}

std::vector<nn::Tensor<float>> ae_window_frames(const FeatureData& data, std::size_t anchor,
                                                std::size_t t_in) {
    if (anchor + 1 < t_in || anchor >= data.n_days()) {
        throw ValidationError("ae_window_frames: window outside the timeline");
    }
    std::vector<nn::Tensor<float>> frames;
    frames.reserve(t_in);
    for (std::size_t t = anchor + 1 - t_in; t <= anchor; ++t) frames.push_back(data.ae_frames[t]);
    return frames;
}

std::vector<nn::Tensor<float>> site_window_steps(const FeatureData& data, std::size_t site,
                                                 std::size_t anchor, std::size_t t_in) {
    if (site >= data.n_sites()) throw ValidationError("site_window_steps: site out of range");
    if (anchor + 1 < t_in || anchor >= data.n_days()) {
        throw ValidationError("site_window_steps: window outside the timeline");
    }
    std::vector<nn::Tensor<float>> steps;
    steps.reserve(t_in);
    for (std::size_t t = anchor + 1 - t_in; t <= anchor; ++t) {
        steps.push_back(data.site_steps[site][t]);
    }
    return steps;
}

std::vector<std::pair<std::size_t, std::size_t>> site_windows(
    const FeatureData& data, const std::vector<std::size_t>& sites,
    const std::vector<std::size_t>& anchors, std::size_t k) {
    std::vector<std::pair<std::size_t, std::size_t>> windows;
    for (std::size_t s : sites) {
        for (std::size_t a : anchors) {
            bool any_valid = false;
            for (std::size_t j = 1; j <= k && !any_valid; ++j) {
                any_valid = std::isfinite(data.site_target[s][a + j]);
            }
            if (any_valid) windows.emplace_back(s, a);
        }
    }
    return windows;
}

}  // namespace smcforge::models
