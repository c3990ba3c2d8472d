#include "smcforge/simworld.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "smcforge/cube_io.hpp"
#include "smcforge/dates.hpp"
#include "smcforge/errors.hpp"
#include "smcforge/rng.hpp"

namespace smcforge::sim {

using raster::ChannelId;
using raster::Raster2D;

namespace {

// Stream tags so every random decision has its own key.
enum Tag : std::uint64_t {
    kTagRainWet = 1,
    kTagRainAmount,
    kTagTmax,
    kTagTminGap,
    kTagInfilLattice,
    kTagThetaLattice,
    kTagNdviLattice,
    kTagRadarVV,
    kTagRadarVH,
    kTagOptical,
    kTagSensor,
    kTagIncidence,
    kTagSitePixel,
};

constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();

/// Smooth per-pixel field: seeded coarse lattice, bilinear upsampling,
/// values in [-1, 1].
Raster2D smooth_field(const raster::GridGeo& geo, rng::Key key, std::uint32_t nodes = 4) {
    std::vector<double> lattice(static_cast<std::size_t>(nodes) * nodes);
    for (std::uint32_t j = 0; j < nodes; ++j) {
        for (std::uint32_t i = 0; i < nodes; ++i) {
            lattice[static_cast<std::size_t>(j) * nodes + i] =
                rng::uniform(key.derive(j).derive(i), -1.0, 1.0);
        }
    }
    Raster2D out = Raster2D::filled(geo, 0.0f);
    for (std::uint32_t y = 0; y < geo.height; ++y) {
        const double ty = geo.height > 1
                              ? static_cast<double>(y) / (geo.height - 1) * (nodes - 1)
                              : 0.0;
        const std::uint32_t j0 = std::min(nodes - 2, static_cast<std::uint32_t>(ty));
        const double fy = ty - j0;
        for (std::uint32_t x = 0; x < geo.width; ++x) {
            const double tx = geo.width > 1
                                  ? static_cast<double>(x) / (geo.width - 1) * (nodes - 1)
                                  : 0.0;
            const std::uint32_t i0 = std::min(nodes - 2, static_cast<std::uint32_t>(tx));
            const double fx = tx - i0;
            const double v00 = lattice[static_cast<std::size_t>(j0) * nodes + i0];
            const double v01 = lattice[static_cast<std::size_t>(j0) * nodes + i0 + 1];
            const double v10 = lattice[static_cast<std::size_t>(j0 + 1) * nodes + i0];
            const double v11 = lattice[static_cast<std::size_t>(j0 + 1) * nodes + i0 + 1];
            const double v = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                             fy * ((1 - fx) * v10 + fx * v11);
            out.set(x, y, static_cast<float>(v));
        }
    }
    return out;
}

double seasonal_et0(int doy) {
    const double phase = 2.0 * 3.14159265358979323846 * doy / 365.25;
    return std::max(0.0, 3.5 + 2.0 * std::cos(phase));
}

/// Circular day-of-year distance.
double doy_distance(double a, double b) {
    const double d = std::fabs(a - b);
    return std::min(d, 365.25 - d);
}

std::uint32_t region_of_column(std::uint32_t x, std::uint32_t width, std::uint32_t n_regions) {
    const std::uint32_t band = std::max<std::uint32_t>(1, width / n_regions);
    return std::min(n_regions - 1, x / band);
}

}  // namespace

void SoilParams::validate() const {
    if (!(theta_r >= 0.0f && theta_r < theta_s && theta_s <= 1.0f)) {
        throw ValidationError("SoilParams: need 0 <= theta_r < theta_s <= 1");
    }
    if (k_infil < 0.0f || k_drain < 0.0f || kc < 0.0f) {
        throw ValidationError("SoilParams: rates must be nonnegative");
    }
}

void CropPhenology::validate() const {
    if (!(ndvi_min >= -1.0f && ndvi_min <= ndvi_max && ndvi_max <= 1.0f)) {
        throw ValidationError("CropPhenology: need -1 <= ndvi_min <= ndvi_max <= 1");
    }
    if (!(width_days > 0.0f)) {
        throw ValidationError("CropPhenology: width_days must be positive");
    }
}

void SimConfig::validate() const {
    if (!grid.valid()) throw ValidationError("SimConfig: invalid grid");
    if (days < 2) throw ValidationError("SimConfig: days must be >= 2");
    if (revisit_s1 < 1 || revisit_s2 < 1) throw ValidationError("SimConfig: revisits must be >= 1");
    if (n_sites < 1) throw ValidationError("SimConfig: n_sites must be >= 1");
    if (n_regions < 1) throw ValidationError("SimConfig: n_regions must be >= 1");
    if (noise_db < 0.0f || optical_noise < 0.0f || sensor_noise < 0.0f) {
        throw ValidationError("SimConfig: noise levels must be nonnegative");
    }
    const std::uint64_t pixels = static_cast<std::uint64_t>(grid.width) * grid.height;
    if (n_sites > pixels) throw ValidationError("SimConfig: more sites than pixels");
}

WaterStep step_water_balance_fluxes(float theta, float rain_mm, float et0_mm,
                                    const SoilParams& p) {
    p.validate();
    if (!(theta >= p.theta_r && theta <= p.theta_s)) {
        throw ValidationError("step_water_balance: theta " + std::to_string(theta) +
                              " outside [theta_r, theta_s]");
    }
    if (rain_mm < 0.0f || et0_mm < 0.0f) {
        throw ValidationError("step_water_balance: negative rain or et0");
    }
    WaterStep step;
    step.infiltration = static_cast<double>(p.k_infil) * rain_mm;
    step.evapotranspiration = static_cast<double>(p.kc) * et0_mm * 0.01 *
                              (static_cast<double>(theta) - p.theta_r) /
                              (static_cast<double>(p.theta_s) - p.theta_r);
    step.drainage = static_cast<double>(p.k_drain) *
                    std::max(0.0, static_cast<double>(theta) - kDrainageThreshold);
    const double raw = static_cast<double>(theta) + step.infiltration - step.evapotranspiration -
                       step.drainage;
    step.clamped = raw < p.theta_r || raw > p.theta_s;
    step.theta_next = static_cast<float>(std::clamp(raw, static_cast<double>(p.theta_r),
                                                    static_cast<double>(p.theta_s)));
    return step;
}

float step_water_balance(float theta, float rain_mm, float et0_mm, const SoilParams& p) {
    return step_water_balance_fluxes(theta, rain_mm, et0_mm, p).theta_next;
}

std::vector<ingest::WeatherRecord> gen_weather(const SimConfig& cfg) {
    cfg.validate();
    const rng::Key root(cfg.seed);
    std::vector<ingest::WeatherRecord> out;
    out.reserve(cfg.days);
    for (std::uint32_t d = 0; d < cfg.days; ++d) {
        const std::int64_t date = cfg.start_day + d;
        const int doy = dates::day_of_year(date);
        ingest::WeatherRecord rec;
        rec.date = date;
        const bool wet = rng::uniform01(root.derive(kTagRainWet).derive(d)) < 0.25;
        rec.rain_mm =
            wet ? static_cast<float>(rng::exponential(root.derive(kTagRainAmount).derive(d), 6.0))
                : 0.0f;
        rec.et0_mm = static_cast<float>(seasonal_et0(doy));
        const double season = std::cos(2.0 * 3.14159265358979323846 * doy / 365.25);
        const double tmax = 24.0 + 8.0 * season + rng::normal(root.derive(kTagTmax).derive(d), 0.0, 2.0);
        const double gap = 6.0 + 4.0 * rng::uniform01(root.derive(kTagTminGap).derive(d));
        rec.tmax_c = static_cast<float>(tmax);
        rec.tmin_c = static_cast<float>(tmax - gap);
        out.push_back(rec);
    }
    return out;
}

std::pair<Raster2D, Raster2D> radar_forward(const Raster2D& theta_map, const Raster2D& ndvi_map,
                                            float inc_deg, float noise_db, std::uint64_t seed) {
    if (!(theta_map.geo() == ndvi_map.geo())) {
        throw ValidationError("radar_forward: theta and ndvi geos differ");
    }
    const rng::Key root(seed);
    Raster2D vv = Raster2D::filled(theta_map.geo());
    Raster2D vh = Raster2D::filled(theta_map.geo());
    for (std::uint32_t y = 0; y < theta_map.height(); ++y) {
        for (std::uint32_t x = 0; x < theta_map.width(); ++x) {
            const float theta = theta_map.at(x, y);
            const float ndvi = ndvi_map.at(x, y);
            if (std::isnan(theta) || std::isnan(ndvi)) continue;
            if (!(theta >= 0.0f && theta <= 1.0f)) {
                throw ValidationError("radar_forward: theta outside [0, 1]");
            }
            if (!(ndvi >= -1.0f && ndvi <= 1.0f)) {
                throw ValidationError("radar_forward: ndvi outside [-1, 1]");
            }
            const rng::Key px = root.derive(y).derive(x);
            const double vv_db = kRadarOffsetDb + kRadarThetaSlopeDb * theta -
                                 kRadarVegetationDb * std::max(0.0f, ndvi) -
                                 kRadarIncidenceSlopeDb * (inc_deg - 35.0f) +
                                 (noise_db > 0.0f
                                      ? noise_db * rng::normal01(px.derive(kTagRadarVV))
                                      : 0.0);
            const double vh_db = vv_db + kRadarVhBiasDb +
                                 (noise_db > 0.0f
                                      ? noise_db * rng::normal01(px.derive(kTagRadarVH))
                                      : 0.0);
            vv.set(x, y, static_cast<float>(vv_db));
            vh.set(x, y, static_cast<float>(vh_db));
        }
    }
    return {std::move(vv), std::move(vh)};
}

std::vector<CropPhenology> default_crops() {
    return {
        CropPhenology{0.15f, 0.75f, 20.0f, 70.0f},   // shiraz-like block
        CropPhenology{0.20f, 0.70f, 45.0f, 60.0f},   // chardonnay-like block
        CropPhenology{0.25f, 0.60f, 350.0f, 80.0f},  // cover-cropped block
    };
}

raster::Raster2D true_ndvi_map(const SimConfig& cfg, const std::vector<CropPhenology>& crops,
                               std::int64_t day) {
    const int doy = dates::day_of_year(day);
    const rng::Key root(cfg.seed);
    const Raster2D jitter = smooth_field(cfg.grid, root.derive(kTagNdviLattice));
    Raster2D out = Raster2D::filled(cfg.grid, 0.0f);
    for (std::uint32_t y = 0; y < cfg.grid.height; ++y) {
        for (std::uint32_t x = 0; x < cfg.grid.width; ++x) {
            const std::uint32_t region = region_of_column(x, cfg.grid.width, cfg.n_regions);
            const CropPhenology& crop = crops[region % crops.size()];
            const double d = doy_distance(doy, crop.peak_doy);
            const double bump = std::exp(-d * d / (2.0 * crop.width_days * crop.width_days));
            double v = crop.ndvi_min + (crop.ndvi_max - crop.ndvi_min) * bump;
            v += 0.05 * jitter.at(x, y);
            out.set(x, y, static_cast<float>(std::clamp(v, -1.0, 1.0)));
        }
    }
    return out;
}

World generate_world(const SimConfig& cfg, const SoilParams& soil,
                     const std::vector<CropPhenology>& crops) {
    cfg.validate();
    soil.validate();
    if (crops.empty()) throw ValidationError("generate_world: need at least one crop");
    for (const CropPhenology& c : crops) c.validate();

    const rng::Key root(cfg.seed);
    World world;
    world.cfg = cfg;
    world.soil = soil;
    world.crops = crops;

    // Sites: one region per vertical band, seeded distinct pixels.
    std::vector<bool> taken(static_cast<std::size_t>(cfg.grid.width) * cfg.grid.height, false);
    for (std::uint32_t s = 0; s < cfg.n_sites; ++s) {
        const std::uint32_t region = s % cfg.n_regions;
        const std::uint32_t band = std::max<std::uint32_t>(1, cfg.grid.width / cfg.n_regions);
        const std::uint32_t x_lo = std::min(cfg.grid.width - 1, region * band);
        const std::uint32_t x_hi =
            region == cfg.n_regions - 1 ? cfg.grid.width : std::min(cfg.grid.width, x_lo + band);
        std::uint32_t px = 0;
        std::uint32_t py = 0;
        for (std::uint64_t attempt = 0;; ++attempt) {
            const rng::Key k = root.derive(kTagSitePixel).derive(s).derive(attempt);
            px = x_lo + static_cast<std::uint32_t>(rng::uniform01(k.derive(0)) * (x_hi - x_lo));
            py = static_cast<std::uint32_t>(rng::uniform01(k.derive(1)) * cfg.grid.height);
            px = std::min(px, cfg.grid.width - 1);
            py = std::min(py, cfg.grid.height - 1);
            const std::size_t idx = static_cast<std::size_t>(py) * cfg.grid.width + px;
            if (!taken[idx]) {
                taken[idx] = true;
                break;
            }
        }
        ingest::SiteMeta site;
        char id[8];
        std::snprintf(id, sizeof id, "S%02u", s + 1);
        site.site_id = id;
        site.region_id = "R" + std::to_string(region + 1);
        site.px = px;
        site.py = py;
        site.crop_label = "crop" + std::to_string(region % crops.size() + 1);
        world.sites.push_back(std::move(site));
    }

    world.weather = gen_weather(cfg);

    // Per-pixel infiltration gain (smooth heterogeneity) and initial state.
    const Raster2D infil_jitter = smooth_field(cfg.grid, root.derive(kTagInfilLattice));
    world.infil_gain = Raster2D::filled(cfg.grid, 0.0f);
    for (std::size_t i = 0; i < world.infil_gain.size(); ++i) {
        world.infil_gain.values()[i] =
            soil.k_infil * (1.0f + 0.35f * infil_jitter.values()[i]);
    }
    const Raster2D theta_jitter = smooth_field(cfg.grid, root.derive(kTagThetaLattice));
    world.theta_init = Raster2D::filled(cfg.grid, 0.0f);
    for (std::size_t i = 0; i < world.theta_init.size(); ++i) {
        const double mid = 0.5 * (soil.theta_r + soil.theta_s);
        const double v = mid + 0.08 * theta_jitter.values()[i];
        world.theta_init.values()[i] = static_cast<float>(
            std::clamp(v, static_cast<double>(soil.theta_r), static_cast<double>(soil.theta_s)));
    }

    // Daily truth: water balance with the per-pixel infiltration gain.
    world.truth.cadence_days = 1;
    world.truth.stacks.reserve(cfg.days);
    Raster2D theta = world.theta_init;
    for (std::uint32_t d = 0; d < cfg.days; ++d) {
        if (d > 0) {
            const ingest::WeatherRecord& w = world.weather[d];
            Raster2D next = Raster2D::filled(cfg.grid, 0.0f);
            for (std::size_t i = 0; i < theta.size(); ++i) {
                SoilParams local = soil;
                local.k_infil = world.infil_gain.values()[i];
                next.values()[i] =
                    step_water_balance(theta.values()[i], w.rain_mm, w.et0_mm, local);
            }
            theta = std::move(next);
        }
        raster::RasterStack stack;
        stack.timestamp = cfg.start_day + d;
        stack.channels.emplace_back(ChannelId::SMC_MAP, theta);
        world.truth.stacks.push_back(std::move(stack));
    }

    // Sensor records: truth at the site pixel plus clipped gaussian noise.
    for (std::size_t s = 0; s < world.sites.size(); ++s) {
        const ingest::SiteMeta& site = world.sites[s];
        for (std::uint32_t d = 0; d < cfg.days; ++d) {
            const float truth_v =
                world.truth.stacks[d].channels.front().second.at(site.px, site.py);
            double v = truth_v;
            if (cfg.sensor_noise > 0.0f) {
                v += cfg.sensor_noise *
                     rng::normal01(root.derive(kTagSensor).derive(s).derive(d));
            }
            ingest::SensorRecord rec;
            rec.site_id = site.site_id;
            rec.date = cfg.start_day + d;
            rec.depth_cm = 30.0f;
            rec.smc = static_cast<float>(std::clamp(v, 0.0, 1.0));
            rec.qc = ingest::Qc::OK;
            world.sensors.push_back(std::move(rec));
        }
    }

    // Merged acquisition series: uniform channel list, NaN planes for the
    // sensor that did not acquire. S1 carries VV+VH only (dual-pol mode),
    // so HH/HV imputation is exercised downstream.
    world.scenes.cadence_days = std::min(cfg.revisit_s1, cfg.revisit_s2);
    for (std::uint32_t d = 0; d < cfg.days; ++d) {
        const bool s1 = d % cfg.revisit_s1 == 0;
        const bool s2 = d % cfg.revisit_s2 == 0;
        if (!s1 && !s2) continue;
        const std::int64_t date = cfg.start_day + d;
        const Raster2D& theta_d = world.truth.stacks[d].channels.front().second;
        const Raster2D ndvi_true = true_ndvi_map(cfg, crops, date);

        raster::RasterStack stack;
        stack.timestamp = date;
        Raster2D vv = Raster2D::filled(cfg.grid);
        Raster2D vh = Raster2D::filled(cfg.grid);
        Raster2D inc = Raster2D::filled(cfg.grid);
        Raster2D red = Raster2D::filled(cfg.grid);
        Raster2D green = Raster2D::filled(cfg.grid);
        Raster2D blue = Raster2D::filled(cfg.grid);
        Raster2D nir = Raster2D::filled(cfg.grid);

        if (s1) {
            const float inc_deg = static_cast<float>(
                35.0 + rng::uniform(root.derive(kTagIncidence).derive(d), -3.0, 3.0));
            auto [vv_map, vh_map] =
                radar_forward(theta_d, ndvi_true, inc_deg, cfg.noise_db,
                              rng::splitmix64(cfg.seed ^ (0xABCDULL + d)));
            vv = std::move(vv_map);
            vh = std::move(vh_map);
            inc = Raster2D::filled(cfg.grid, inc_deg);
        }
        if (s2) {
            for (std::uint32_t y = 0; y < cfg.grid.height; ++y) {
                for (std::uint32_t x = 0; x < cfg.grid.width; ++x) {
                    const double v = ndvi_true.at(x, y);
                    const rng::Key px = root.derive(kTagOptical).derive(d).derive(y).derive(x);
                    auto noisy = [&](double base, std::uint64_t tag) {
                        double r = base;
                        if (cfg.optical_noise > 0.0f) {
                            r += cfg.optical_noise * rng::normal01(px.derive(tag));
                        }
                        return static_cast<float>(std::max(1e-4, r));
                    };
                    const double total = 0.5;  // NIR + RED reflectance budget
                    const double nir_base = total * (1.0 + v) / 2.0;
                    const double red_base = total * (1.0 - v) / 2.0;
                    nir.set(x, y, noisy(nir_base, 1));
                    red.set(x, y, noisy(red_base, 2));
                    green.set(x, y, noisy(0.6 * red_base + 0.3 * nir_base, 3));
                    blue.set(x, y, noisy(0.8 * red_base, 4));
                }
            }
        }
        stack.channels.emplace_back(ChannelId::VV_DB, std::move(vv));
        stack.channels.emplace_back(ChannelId::VH_DB, std::move(vh));
        stack.channels.emplace_back(ChannelId::INC_DEG, std::move(inc));
        stack.channels.emplace_back(ChannelId::RED, std::move(red));
        stack.channels.emplace_back(ChannelId::GREEN, std::move(green));
        stack.channels.emplace_back(ChannelId::BLUE, std::move(blue));
        stack.channels.emplace_back(ChannelId::NIR, std::move(nir));
        world.scenes.stacks.push_back(std::move(stack));
    }

    world.scenes.validate();
    world.truth.validate();
    return world;
}

namespace {

nlohmann::ordered_json soil_to_json(const SoilParams& s) {
    return {{"theta_r", s.theta_r},
            {"theta_s", s.theta_s},
            {"k_infil", s.k_infil},
            {"k_drain", s.k_drain},
            {"kc", s.kc}};
}

SoilParams soil_from_json(const nlohmann::json& j) {
    SoilParams s;
    s.theta_r = j.at("theta_r").get<float>();
    s.theta_s = j.at("theta_s").get<float>();
    s.k_infil = j.at("k_infil").get<float>();
    s.k_drain = j.at("k_drain").get<float>();
    s.kc = j.at("kc").get<float>();
    return s;
}

}  // namespace

void save_world(const World& world, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    raster::cube_write(world.scenes, dir / "scenes.smc1");
    raster::cube_write(world.truth, dir / "truth.smc1");
    ingest::write_sensor_csv(world.sensors, dir / "sensors.csv");
    ingest::write_weather_csv(world.weather, dir / "weather.csv");
    ingest::write_sites_csv(world.sites, dir / "sites.csv");

    nlohmann::ordered_json j;
    j["grid"] = {{"width", world.cfg.grid.width},
                 {"height", world.cfg.grid.height},
                 {"origin_x", world.cfg.grid.origin_x},
                 {"origin_y", world.cfg.grid.origin_y},
                 {"pixel_size", world.cfg.grid.pixel_size}};
    j["n_sites"] = world.cfg.n_sites;
    j["n_regions"] = world.cfg.n_regions;
    j["days"] = world.cfg.days;
    j["revisit_s1"] = world.cfg.revisit_s1;
    j["revisit_s2"] = world.cfg.revisit_s2;
    j["seed"] = world.cfg.seed;
    j["noise_db"] = world.cfg.noise_db;
    j["optical_noise"] = world.cfg.optical_noise;
    j["sensor_noise"] = world.cfg.sensor_noise;
    j["start_date"] = dates::format_iso_date(world.cfg.start_day);
    j["soil"] = soil_to_json(world.soil);
    j["crops"] = nlohmann::ordered_json::array();
    for (const CropPhenology& c : world.crops) {
        j["crops"].push_back({{"ndvi_min", c.ndvi_min},
                              {"ndvi_max", c.ndvi_max},
                              {"peak_doy", c.peak_doy},
                              {"width_days", c.width_days}});
    }
    std::ofstream out(dir / "world.json", std::ios::trunc);
    if (!out) throw IoError("cannot open '" + (dir / "world.json").string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for world.json");
}

WorldFiles load_world(const std::filesystem::path& dir) {
    const std::filesystem::path world_json = dir / "world.json";
    std::ifstream in(world_json);
    if (!in) throw IoError("cannot open '" + world_json.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("bad world.json: " + std::string(e.what()));
    }

    WorldFiles files;
    files.cfg.grid.width = j.at("grid").at("width").get<std::uint32_t>();
    files.cfg.grid.height = j.at("grid").at("height").get<std::uint32_t>();
    files.cfg.grid.origin_x = j.at("grid").at("origin_x").get<double>();
    files.cfg.grid.origin_y = j.at("grid").at("origin_y").get<double>();
    files.cfg.grid.pixel_size = j.at("grid").at("pixel_size").get<double>();
    files.cfg.n_sites = j.at("n_sites").get<std::uint32_t>();
    files.cfg.n_regions = j.at("n_regions").get<std::uint32_t>();
    files.cfg.days = j.at("days").get<std::uint32_t>();
    files.cfg.revisit_s1 = j.at("revisit_s1").get<std::uint32_t>();
    files.cfg.revisit_s2 = j.at("revisit_s2").get<std::uint32_t>();
    files.cfg.seed = j.at("seed").get<std::uint64_t>();
    files.cfg.noise_db = j.at("noise_db").get<float>();
    files.cfg.optical_noise = j.at("optical_noise").get<float>();
    files.cfg.sensor_noise = j.at("sensor_noise").get<float>();
    files.cfg.start_day = dates::parse_iso_date(j.at("start_date").get<std::string>());
    files.soil = soil_from_json(j.at("soil"));
    for (const auto& c : j.at("crops")) {
        CropPhenology crop;
        crop.ndvi_min = c.at("ndvi_min").get<float>();
        crop.ndvi_max = c.at("ndvi_max").get<float>();
        crop.peak_doy = c.at("peak_doy").get<float>();
        crop.width_days = c.at("width_days").get<float>();
        files.crops.push_back(crop);
    }

    files.scenes = raster::cube_read(dir / "scenes.smc1");
    files.truth = raster::cube_read(dir / "truth.smc1");
    files.sites = ingest::load_sites_csv(dir / "sites.csv");
    files.sensors = ingest::load_sensor_csv(dir / "sensors.csv");
    files.weather = ingest::load_weather_csv(dir / "weather.csv");
    return files;
}

}  // namespace smcforge::sim
