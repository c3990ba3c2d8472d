#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "smcforge/eval/metrics.hpp"
#include "smcforge/ingest.hpp"
#include "smcforge/models/ae.hpp"
#include "smcforge/models/dataset.hpp"
#include "smcforge/models/lstm.hpp"
#include "smcforge/models/train.hpp"
#include "smcforge/simworld.hpp"

namespace smcforge::eval {

/// One report row: a model's accuracy on the held-out span at one forecast
/// horizon. horizon 0 pools every step; 1..K are the per-step slices. The
/// constant-mean baseline carries seed 0 (it has nothing to randomize).
struct MetricRow {
    std::string model;  // "ae", "lstm", "mean"
    double fraction = 1.0;
    std::uint64_t seed = 0;
    std::size_t horizon = 0;
    double rmse = 0.0, mae = 0.0, r2 = 0.0, pearson = 0.0;
    std::size_t n = 0;
};

struct MetricReport {
    std::vector<MetricRow> rows;
    std::vector<std::string> warnings;  // e.g. fractions too small to train on
};

/// Knobs of the data-ablation comparison. Model shapes follow their config
/// defaults; the grid dimensions are taken from the world. Fit budgets are
/// sized for the desk-scale world on one CPU core.
struct AblationConfig {
    std::vector<double> fractions{0.05, 0.25, 1.0};
    std::vector<std::uint64_t> seeds{1, 2, 3};
    double holdout_day_fraction = 0.2;
    std::size_t holdout_site_every = 4;
    models::AeConfig ae;
    models::SiteLstmConfig lstm;
    models::FitConfig ae_fit;
    models::FitConfig lstm_fit;

    AblationConfig() {
        ae_fit.epochs = 30;
        ae_fit.lr = 3e-3;
        ae_fit.windows_per_epoch = 64;
        lstm_fit.epochs = 30;
        lstm_fit.lr = 3e-3;
        lstm_fit.windows_per_epoch = 300;
    }
};

/// Held-out forecast/target pairs, one vector per horizon step. Targets are
/// the true moisture at the held-out sites' pixels — the one yardstick both
/// model families can be measured against.
struct EvalPairs {
    std::vector<std::vector<double>> pred, truth;  // [horizon step][sample]
};

EvalPairs collect_map_forecasts(const models::AeModel<float>& model,
                                const models::FeatureData& data,
                                const std::vector<std::size_t>& anchors,
                                const std::vector<std::size_t>& sites,
                                const std::vector<ingest::SiteMeta>& metas);

EvalPairs collect_site_forecasts(const models::SiteLstm<float>& model,
                                 const models::FeatureData& data,
                                 const std::vector<std::size_t>& anchors,
                                 const std::vector<std::size_t>& sites,
                                 const std::vector<ingest::SiteMeta>& metas);

/// Per-step rows (horizon 1..K) plus the pooled row (horizon 0).
std::vector<MetricRow> rows_from_pairs(const std::string& model, double fraction,
                                       std::uint64_t seed, const EvalPairs& pairs);

/// Rows for the constant-mean baseline: predicts the mean training-span
/// sensor reading everywhere (midpoint of [theta_r, theta_s] when there are
/// no readings), sampled like the site forecaster. Always seed 0.
std::vector<MetricRow> mean_baseline_rows(const models::FeatureData& data,
                                          const models::SplitSpec& split,
                                          const std::vector<std::size_t>& anchors,
                                          std::size_t horizon,
                                          const std::vector<ingest::SiteMeta>& metas,
                                          double fraction, float theta_r, float theta_s);

/// Trains both forecasters per (fraction, seed), evaluates them on the
/// held-out span at the held-out sites, and adds a constant-mean baseline
/// per fraction. Deterministic for a fixed seed list.
MetricReport ablation_experiment(const sim::World& world, const AblationConfig& cfg);

/// CSV with header `model,fraction,seed,horizon,rmse,mae,r2,pearson,n`.
void write_report_csv(const MetricReport& report, const std::filesystem::path& path);

/// Mean/std across seeds per (model, fraction, horizon) cell.
nlohmann::ordered_json report_summary(const MetricReport& report);

}  // namespace smcforge::eval
