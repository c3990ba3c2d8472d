#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include <json.hpp>

#include "smcforge/features.hpp"
#include "smcforge/models/ae.hpp"
#include "smcforge/models/dataset.hpp"
#include "smcforge/models/lstm.hpp"

// Seeded single-threaded training loops (Adam + truncated BPTT over daily
// windows, masked MSE) and the checkpoint wrappers that carry a model's
// configuration and normalization statistics alongside its weights.

namespace smcforge::models {

struct FitConfig {
    std::size_t epochs = 40;
    double lr = 1e-3;
    double clip_norm = 5.0;
    std::uint64_t seed = 42;
    // 0 trains on every window each epoch; otherwise each epoch visits a
    // seeded subsample of this size (keeps large runs inside a CPU budget).
    std::size_t windows_per_epoch = 0;
};

/// Decays linearly from 1 at epoch 0 to 0 at half the run, 0 afterwards.
double teacher_forcing_probability(std::size_t epoch, std::size_t total_epochs);

struct FitResult {
    std::vector<double> loss_trace;  // mean window loss per epoch
};

/// Map-forecaster training over day windows anchored at `anchors`; targets
/// are the truth maps. Deterministic per (seed, data, anchors).
FitResult fit_ae(AeModel<float>& model, const FeatureData& data,
                 const std::vector<std::size_t>& anchors, const FitConfig& fc);

/// Site-forecaster training over (site, anchor) windows; targets are the
/// sensor readings, missing days masked out.
FitResult fit_site_lstm(SiteLstm<float>& model, const FeatureData& data,
                        const std::vector<std::pair<std::size_t, std::size_t>>& windows,
                        const FitConfig& fc);

// Checkpoints carry {model kind, config, channel stats, extra metadata} in
// the manifest plus every named parameter tensor.
void save_ae_checkpoint(const AeModel<float>& model, const features::ChannelStats& stats,
                        const nlohmann::ordered_json& extra, const std::filesystem::path& path);
AeModel<float> load_ae_checkpoint(const std::filesystem::path& path,
                                  features::ChannelStats* stats_out = nullptr);

void save_site_lstm_checkpoint(const SiteLstm<float>& model, const features::ChannelStats& stats,
                               const nlohmann::ordered_json& extra,
                               const std::filesystem::path& path);
SiteLstm<float> load_site_lstm_checkpoint(const std::filesystem::path& path,
                                          features::ChannelStats* stats_out = nullptr);

}  // namespace smcforge::models
