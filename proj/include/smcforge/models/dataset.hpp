#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "smcforge/features.hpp"
#include "smcforge/ingest.hpp"
#include "smcforge/models/ae.hpp"
#include "smcforge/models/lstm.hpp"
#include "smcforge/nn/tensor.hpp"
#include "smcforge/raster.hpp"

// Turns an aligned dataset plus its scene cubes into model-ready tensors:
// one z-scored feature frame per day for the map forecaster, one feature
// vector per (site, day) for the site forecaster, and the train/holdout
// split bookkeeping shared by training, evaluation, and the data-ablation
// experiment.

namespace smcforge::models {

/// Day-index and site-index split. Held-out days are the final stretch of
/// the timeline; held-out sites are every holdout_site_every-th site.
/// train_day_start > 0 carves out the most recent slice of the training
/// span (the data-fraction knob of the ablation experiment).
struct SplitSpec {
    std::size_t train_day_start = 0;
    std::size_t holdout_day_start = 0;
    std::vector<std::size_t> train_sites;
    std::vector<std::size_t> holdout_sites;
};

SplitSpec make_split(std::size_t n_days, std::size_t n_sites, double holdout_day_fraction,
                     std::size_t holdout_site_every, double train_fraction);

/// Everything the trainers and evaluators index by day.
struct FeatureData {
    raster::GridGeo geo;
    std::vector<std::int64_t> days;
    features::ChannelStats stats;

    // EO-only frames (ground channels zeroed), one (14, H, W) tensor per day.
    std::vector<nn::Tensor<float>> ae_frames;

    // Ground-truth moisture maps when a truth cube is supplied; mask is 1 on
    // valid cells. Tensors are empty on days without a truth stack.
    bool has_truth = false;
    std::vector<nn::Tensor<float>> truth_maps;
    std::vector<nn::Tensor<float>> truth_mask;

    // Site feature vectors: EO/weather channels as 3x3 neighbourhood means
    // of the z-scored planes, plus the site's lagged sensor reading.
    std::vector<std::vector<nn::Tensor<float>>> site_steps;  // [site][day] -> (14)

    // Sensor reading per (site, day); NaN where the record is missing.
    std::vector<std::vector<float>> site_target;

    [[nodiscard]] std::size_t n_days() const { return days.size(); }
    [[nodiscard]] std::size_t n_sites() const { return site_steps.size(); }
};

/// Normalization statistics come from days [stats_day_lo, stats_day_hi)
/// only, so held-out data never leaks into the scaling. zero_lag zeroes the
/// lagged-sensor feature of every site vector (ablation support).
FeatureData build_feature_data(const ingest::AlignedDataset& aligned,
                               const raster::SceneSeries& scenes,
                               const raster::SceneSeries* truth, std::size_t stats_day_lo,
                               std::size_t stats_day_hi, bool zero_lag = false);

/// Anchors a where frames [a-T+1 .. a] and targets [a+1 .. a+K] all lie in
/// the training span.
std::vector<std::size_t> train_anchors(const SplitSpec& split, std::size_t t_in, std::size_t k);

/// Anchors whose targets [a+1 .. a+K] lie fully in the held-out span; the
/// input window may reach back into the training span (forecasting across
/// the boundary is the realistic deployment case).
std::vector<std::size_t> holdout_anchors(const SplitSpec& split, std::size_t n_days,
                                         std::size_t t_in, std::size_t k);

std::vector<nn::Tensor<float>> ae_window_frames(const FeatureData& data, std::size_t anchor,
                                                std::size_t t_in);
std::vector<nn::Tensor<float>> site_window_steps(const FeatureData& data, std::size_t site,
                                                 std::size_t anchor, std::size_t t_in);

/// (site, anchor) pairs over the given sites with at least one non-missing
/// sensor target in the window.
std::vector<std::pair<std::size_t, std::size_t>> site_windows(
    const FeatureData& data, const std::vector<std::size_t>& sites,
    const std::vector<std::size_t>& anchors, std::size_t k);

}  // namespace smcforge::models
