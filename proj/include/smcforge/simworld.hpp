#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "smcforge/ingest.hpp"
#include "smcforge/raster.hpp"

namespace smcforge::sim {

struct SoilParams {
    float theta_r = 0.05f;   // residual SMC
    float theta_s = 0.45f;   // saturation SMC
    float k_infil = 0.004f;  // SMC gain per mm rain
    float k_drain = 0.08f;   // daily drainage rate above field capacity
    float kc = 0.8f;         // crop ET coefficient

    void validate() const;
};

/// Drainage kicks in above this moisture level.
inline constexpr float kDrainageThreshold = 0.30f;

struct CropPhenology {
    float ndvi_min = 0.15f;
    float ndvi_max = 0.75f;
    float peak_doy = 20.0f;    // southern-hemisphere summer
    float width_days = 70.0f;  // gaussian width of the green-up bump

    void validate() const;
};

struct SimConfig {
    raster::GridGeo grid{16, 16, 0.0, 0.0, 10.0};
    std::uint32_t n_sites = 20;
    std::uint32_t n_regions = 3;
    std::uint32_t days = 730;
    std::uint32_t revisit_s1 = 3;
    std::uint32_t revisit_s2 = 5;
    std::uint64_t seed = 42;
    float noise_db = 0.5f;        // radar noise std, dB
    float optical_noise = 0.01f;  // reflectance noise std
    float sensor_noise = 0.01f;   // SMC sensor noise std, m3/m3
    std::int64_t start_day = 16436;  // 2015-01-01

    void validate() const;
};

/// One water-balance step with its flux bookkeeping (f64 fluxes so the
/// budget audit has no rounding slack of its own).
struct WaterStep {
    float theta_next = 0.0f;
    double infiltration = 0.0;
    double evapotranspiration = 0.0;
    double drainage = 0.0;
    bool clamped = false;
};

/// theta' = clamp(theta + k_infil*rain
///                      - kc*et0*0.01*(theta-theta_r)/(theta_s-theta_r)
///                      - k_drain*max(0, theta-0.30), theta_r, theta_s)
WaterStep step_water_balance_fluxes(float theta, float rain_mm, float et0_mm, const SoilParams& p);

float step_water_balance(float theta, float rain_mm, float et0_mm, const SoilParams& p);

/// Seeded daily weather: rain = Bernoulli(0.25) x Exponential(mean 6 mm),
/// et0 a seasonal sinusoid in [1.5, 5.5] mm peaking at new year (southern
/// hemisphere), temperatures consistent with the season.
std::vector<ingest::WeatherRecord> gen_weather(const SimConfig& cfg);

/// C-band forward model:
///   vv_db = -25 + 40*theta - 4*max(0, ndvi) - 0.15*(inc - 35) + N(0, noise_db)
///   vh_db = vv_db - 7 + independent N(0, noise_db)
/// NaN cells pass through. Deterministic per seed.
std::pair<raster::Raster2D, raster::Raster2D> radar_forward(const raster::Raster2D& theta_map,
                                                            const raster::Raster2D& ndvi_map,
                                                            float inc_deg, float noise_db,
                                                            std::uint64_t seed);

inline constexpr float kRadarOffsetDb = -25.0f;
inline constexpr float kRadarThetaSlopeDb = 40.0f;
inline constexpr float kRadarVegetationDb = 4.0f;
inline constexpr float kRadarIncidenceSlopeDb = 0.15f;
inline constexpr float kRadarVhBiasDb = -7.0f;

struct World {
    SimConfig cfg;
    SoilParams soil;
    std::vector<CropPhenology> crops;

    raster::SceneSeries scenes;  // merged S1+S2 acquisitions; unacquired planes are NaN
    raster::SceneSeries truth;   // daily SMC_MAP ground truth
    std::vector<ingest::SiteMeta> sites;
    std::vector<ingest::SensorRecord> sensors;
    std::vector<ingest::WeatherRecord> weather;

    raster::Raster2D infil_gain;  // per-pixel k_infil actually used (jittered)
    raster::Raster2D theta_init;  // initial moisture state (equals truth day 0)
};

std::vector<CropPhenology> default_crops();

/// End-to-end synthesis; reproducible bitwise from cfg.seed.
World generate_world(const SimConfig& cfg, const SoilParams& soil,
                     const std::vector<CropPhenology>& crops);

/// The true (noise-free) NDVI surface for a given day; used by the radar
/// forward model and exposed for oracle checks.
raster::Raster2D true_ndvi_map(const SimConfig& cfg, const std::vector<CropPhenology>& crops,
                               std::int64_t day);

// File layout written by `simulate`: scenes.smc1, truth.smc1, sensors.csv,
// weather.csv, sites.csv, world.json (config + soil + crops + seed).
void save_world(const World& world, const std::filesystem::path& dir);

struct WorldFiles {
    SimConfig cfg;
    SoilParams soil;
    std::vector<CropPhenology> crops;
    raster::SceneSeries scenes;
    raster::SceneSeries truth;
    std::vector<ingest::SiteMeta> sites;
    std::vector<ingest::SensorRecord> sensors;
    std::vector<ingest::WeatherRecord> weather;
};

WorldFiles load_world(const std::filesystem::path& dir);

}  // namespace smcforge::sim
