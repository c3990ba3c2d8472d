#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "smcforge/features.hpp"
#include "smcforge/ingest.hpp"
#include "smcforge/models/ae.hpp"
#include "smcforge/models/lstm.hpp"
#include "smcforge/models/train.hpp"
#include "smcforge/simworld.hpp"

namespace smcforge::cli {

/// The one serialized source of truth for a pipeline run. Every knob lives
/// in the JSON config; the command line only points at the file and may
/// override the seed and the working directory.
///
/// Sections: sim, features, ae, lstm, train, eval, paths. Unknown keys are
/// rejected at every level so typos fail loudly instead of silently running
/// with defaults.
struct RunConfig {
    sim::SimConfig sim;
    sim::SoilParams soil;
    std::vector<sim::CropPhenology> crops = sim::default_crops();

    // features
    std::uint32_t max_gap_days = ingest::kDefaultMaxGapDays;
    float crop_ndvi_threshold = features::kDefaultCropNdviThreshold;
    std::string ndvi_date;  // empty: latest optical acquisition

    models::AeConfig ae;
    models::SiteLstmConfig lstm;

    // train
    std::string train_model = "both";  // "ae" | "lstm" | "both"
    std::uint64_t train_seed = 42;
    models::FitConfig ae_fit;
    models::FitConfig lstm_fit;

    // eval
    std::vector<double> fractions{0.05, 0.25, 1.0};
    std::vector<std::uint64_t> eval_seeds{1, 2, 3};
    double holdout_day_fraction = 0.2;
    std::size_t holdout_site_every = 4;
    std::string predict_date;  // empty: forecast from the last day on record

    std::filesystem::path workdir = "runs/out";

    RunConfig();
};

/// Strict parse; throws ValidationError on unknown keys, wrong types, or
/// invalid values.
RunConfig parse_run_config(const nlohmann::json& doc);

/// Reads and parses a config file. IoError when unreadable, ValidationError
/// when it is not valid JSON or violates the schema.
RunConfig load_run_config(const std::filesystem::path& path);

/// The fully-resolved config (defaults filled in), round-trippable through
/// parse_run_config. Embedded in every run manifest.
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

void apply_overrides(RunConfig& cfg, const std::optional<std::uint64_t>& seed,
                     const std::optional<std::string>& workdir);

/// FNV-1a 64-bit of a file's bytes as 16 hex digits; content-only, so equal
/// outputs hash equal regardless of when they were written.
std::string file_hash(const std::filesystem::path& path);

// Commands. Each writes only under cfg.workdir, drops a run manifest at
// manifests/<command>.json (inputs, seeds, output hashes), and throws
// ValidationError (exit 1) or IoError (exit 2) on failure.
void cmd_simulate(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_predict(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_compare(const RunConfig& cfg);
void cmd_ndvi_map(const RunConfig& cfg);

/// Dispatch by subcommand name ("ndvi-map" for cmd_ndvi_map).
void run_command(const std::string& name, const RunConfig& cfg);

}  // namespace smcforge::cli
