#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "smcforge/raster.hpp"

namespace smcforge::ingest {

enum class Qc : std::uint8_t { OK, SUSPECT, MISSING };

/// Per-day sensor status after alignment.
enum class SmcFlag : std::uint8_t { OK, INTERPOLATED, MISSING };

struct SiteMeta {
    std::string site_id;
    std::string region_id;
    std::uint32_t px = 0;
    std::uint32_t py = 0;
    std::string crop_label;
};

struct SensorRecord {
    std::string site_id;
    std::int64_t date = 0;  // days since epoch
    float depth_cm = 0.0f;
    float smc = 0.0f;  // volumetric fraction m3/m3
    Qc qc = Qc::OK;
};

struct WeatherRecord {
    std::int64_t date = 0;
    float rain_mm = 0.0f;
    float et0_mm = 0.0f;
    float tmin_c = 0.0f;
    float tmax_c = 0.0f;
};

// CSV schemas (UTF-8, comma separated, '.' decimal, no quoting):
//   sensors.csv  site_id,date,depth_cm,smc_m3m3,qc
//   weather.csv  date,rain_mm,et0_mm,tmin_c,tmax_c
//   sites.csv    site_id,region_id,px,py,crop_label
// Loaders validate the header and report row-level problems as
// "<path>:<line>: <reason>".

std::vector<SensorRecord> load_sensor_csv(const std::filesystem::path& path);
std::vector<WeatherRecord> load_weather_csv(const std::filesystem::path& path);
std::vector<SiteMeta> load_sites_csv(const std::filesystem::path& path);

void write_sensor_csv(const std::vector<SensorRecord>& records, const std::filesystem::path& path);
void write_weather_csv(const std::vector<WeatherRecord>& records, const std::filesystem::path& path);
void write_sites_csv(const std::vector<SiteMeta>& sites, const std::filesystem::path& path);

/// Everything joined onto one contiguous daily axis.
struct AlignedDataset {
    std::vector<std::int64_t> days;  // contiguous ascending calendar days
    std::vector<WeatherRecord> weather;  // one per day

    // Whole-stack forward fill: most recent stack at or before each day.
    std::vector<std::int32_t> stack_index;  // -1 before the first stack
    std::vector<std::int32_t> stack_age;    // days since that stack, 0 on acquisition days

    // Per-channel forward fill. A stack supplies a channel only when the
    // plane exists and has at least one valid cell, so a merged cube with
    // NaN planes for the sensor that did not acquire behaves like separate
    // per-sensor stacks.
    std::vector<std::array<std::int32_t, raster::kChannelCount>> channel_source;
    std::vector<std::array<std::int32_t, raster::kChannelCount>> channel_age;

    std::vector<SiteMeta> sites;
    std::vector<std::vector<float>> site_smc;    // [site][day_index]
    std::vector<std::vector<SmcFlag>> site_flag; // [site][day_index]

    [[nodiscard]] std::size_t n_days() const { return days.size(); }
    [[nodiscard]] std::int64_t first_day() const { return days.front(); }
    /// Index of a calendar day, or -1 when outside the window.
    [[nodiscard]] std::int64_t index_of(std::int64_t day) const {
        if (days.empty() || day < days.front() || day > days.back()) return -1;
        return day - days.front();
    }
};

inline constexpr std::uint32_t kDefaultMaxGapDays = 3;

/// Joins sensors, weather and EO stacks onto the daily overlap window.
/// Sensor gaps of at most max_gap_days are linearly interpolated and flagged
/// INTERPOLATED; longer gaps and days outside a site's first/last good
/// reading stay MISSING. EO stacks are forward-filled with their age kept.
/// Throws ValidationError when the overlap window is empty or weather has
/// holes inside it.
AlignedDataset align_daily(const std::vector<SiteMeta>& sites,
                           const std::vector<SensorRecord>& sensors,
                           const std::vector<WeatherRecord>& weather,
                           const raster::SceneSeries& series,
                           std::uint32_t max_gap_days = kDefaultMaxGapDays);

}  // namespace smcforge::ingest
