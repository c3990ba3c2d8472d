#include "smcforge/features.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "smcforge/dates.hpp"
#include "smcforge/errors.hpp"

namespace smcforge::features {

using raster::ChannelId;
using raster::Raster2D;

const ChannelStats::Entry& ChannelStats::at(ChannelId id) const {
    const auto it = entries.find(id);
    if (it == entries.end()) {
        throw ValidationError("ChannelStats: no entry for channel " +
                              std::string(raster::channel_name(id)));
    }
    return it->second;
}

void ChannelStatsBuilder::add(ChannelId id, float value) {
    if (std::isnan(value)) return;
    Acc& a = acc_[id];
    a.sum += value;
    a.sum_sq += static_cast<double>(value) * value;
    ++a.n;
}

void ChannelStatsBuilder::add_plane(ChannelId id, const Raster2D& plane) {
    for (float v : plane.values()) add(id, v);
}

ChannelStats ChannelStatsBuilder::finalize() const {
    ChannelStats stats;
    for (const auto& [id, a] : acc_) {
        if (a.n == 0) continue;
        const double mean = a.sum / static_cast<double>(a.n);
        const double var = std::max(0.0, a.sum_sq / static_cast<double>(a.n) - mean * mean);
        ChannelStats::Entry e;
        e.mean = static_cast<float>(mean);
        e.std = static_cast<float>(std::sqrt(var));
        e.constant = e.std == 0.0f;
        stats.entries[id] = e;
    }
    return stats;
}

nlohmann::ordered_json stats_to_json(const ChannelStats& stats) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [id, e] : stats.entries) {
        j[std::string(raster::channel_name(id))] = {
            {"mean", e.mean}, {"std", e.std}, {"constant", e.constant}};
    }
    return j;
}

ChannelStats stats_from_json(const nlohmann::json& j) {
    ChannelStats stats;
    for (const auto& [key, value] : j.items()) {
        ChannelStats::Entry e;
        e.mean = value.at("mean").get<float>();
        e.std = value.at("std").get<float>();
        e.constant = value.at("constant").get<bool>();
        stats.entries[raster::channel_from_name(key)] = e;
    }
    return stats;
}

void save_stats_json(const ChannelStats& stats, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << stats_to_json(stats).dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

ChannelStats load_stats_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("bad stats JSON '" + path.string() + "': " + e.what());
    }
    return stats_from_json(j);
}

namespace {

void require_same_geo(const Raster2D& a, const Raster2D& b, const char* op) {
    if (!(a.geo() == b.geo())) {
        throw ValidationError(std::string(op) + ": input geos differ");
    }
}

}  // namespace

Raster2D ndvi(const Raster2D& nir, const Raster2D& red) {
    require_same_geo(nir, red, "ndvi");
    Raster2D out = Raster2D::filled(nir.geo());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const float n = nir.values()[i];
        const float r = red.values()[i];
        if (std::isnan(n) || std::isnan(r)) continue;
        const float denom = n + r;
        if (denom == 0.0f) continue;
        out.values()[i] = (n - r) / denom;
    }
    return out;
}

Raster2D to_db(const Raster2D& sigma0_linear) {
    constexpr float kFloorLinear = 1e-6f;
    constexpr float kFloorDb = -60.0f;
    Raster2D out = Raster2D::filled(sigma0_linear.geo());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const float x = sigma0_linear.values()[i];
        if (std::isnan(x)) continue;
        if (x < 0.0f) {
            throw ValidationError("to_db: negative backscatter " + std::to_string(x));
        }
        out.values()[i] = x <= kFloorLinear ? kFloorDb : 10.0f * std::log10(x);
    }
    return out;
}

Raster2D incidence_normalize(const Raster2D& sigma_db, const Raster2D& inc_deg, float ref_deg) {
    require_same_geo(sigma_db, inc_deg, "incidence_normalize");
    if (!(ref_deg > 0.0f && ref_deg < 90.0f)) {
        throw ValidationError("incidence_normalize: reference angle out of (0, 90)");
    }
    constexpr double kDegToRad = std::numbers::pi / 180.0;
    const double cos_ref = std::cos(ref_deg * kDegToRad);
    Raster2D out = Raster2D::filled(sigma_db.geo());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const float s = sigma_db.values()[i];
        const float inc = inc_deg.values()[i];
        if (std::isnan(s) || std::isnan(inc)) continue;
        if (!(inc > 0.0f && inc < 90.0f)) {
            throw ValidationError("incidence_normalize: incidence angle " + std::to_string(inc) +
                                  " out of (0, 90)");
        }
        const double cos_inc = std::cos(inc * kDegToRad);
        out.values()[i] =
            s + static_cast<float>(10.0 * std::log10((cos_ref * cos_ref) / (cos_inc * cos_inc)));
    }
    return out;
}

Raster2D crop_mask(const Raster2D& ndvi_plane, float threshold) {
    if (!(threshold >= -1.0f && threshold <= 1.0f)) {
        throw ValidationError("crop_mask: threshold outside [-1, 1]");
    }
    Raster2D out = Raster2D::filled(ndvi_plane.geo());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const float v = ndvi_plane.values()[i];
        if (std::isnan(v)) continue;
        out.values()[i] = v >= threshold ? 1.0f : 0.0f;
    }
    return out;
}

SeasonalPhase seasonal_phase(double day_of_year) {
    const double phase = 2.0 * std::numbers::pi * day_of_year / 365.25;
    return SeasonalPhase{std::sin(phase), std::cos(phase)};
}

AssembledStack assemble_stack(const ChannelInputs& inputs, std::int64_t date,
                              const ChannelStats& stats, StackMode mode) {
    const raster::GridGeo* geo = nullptr;
    for (const auto& [id, plane] : inputs) {
        if (geo == nullptr) geo = &plane.geo();
        else if (!(*geo == plane.geo())) {
            throw ValidationError("assemble_stack: input geos differ on " +
                                  std::string(raster::channel_name(id)));
        }
    }
    if (geo == nullptr) {
        throw ValidationError("assemble_stack: no input planes");
    }

    const SeasonalPhase phase = seasonal_phase(dates::day_of_year(date));

    AssembledStack out;
    out.stack.timestamp = date;
    out.stack.channels.reserve(raster::kFeatureChannelCount);

    for (ChannelId id : raster::kFeatureChannels) {
        // Ground channels are hard zeros in AE mode, before any scaling.
        if (mode == StackMode::AE && (id == ChannelId::RAIN_MM || id == ChannelId::SMC_LAG)) {
            out.stack.channels.emplace_back(id, Raster2D::filled(*geo, 0.0f));
            continue;
        }

        Raster2D plane = Raster2D::filled(*geo);
        bool imputed_whole = false;
        if (id == ChannelId::DOY_SIN) {
            plane = Raster2D::filled(*geo, static_cast<float>(phase.sin_doy));
        } else if (id == ChannelId::DOY_COS) {
            plane = Raster2D::filled(*geo, static_cast<float>(phase.cos_doy));
        } else if (const auto it = inputs.find(id); it != inputs.end()) {
            plane = it->second;
        } else if (id == ChannelId::NDVI && inputs.count(ChannelId::NIR) &&
                   inputs.count(ChannelId::RED)) {
            plane = ndvi(inputs.at(ChannelId::NIR), inputs.at(ChannelId::RED));
        } else {
            imputed_whole = true;
        }

        // A channel absent from the training statistics was never observed
        // in training; whatever arrives now has no usable scale, so it
        // degrades to an imputed zero plane.
        const bool no_stats = !stats.has(id);
        const ChannelStats::Entry st =
            no_stats ? ChannelStats::Entry{0.0f, 0.0f, true} : stats.at(id);
        if (imputed_whole || no_stats) {
            plane = Raster2D::filled(*geo, st.mean);
            out.imputed.push_back(id);
        }

        // z-score; remaining NaN cells take the mean, i.e. 0 after scaling.
        const float inv_std = st.constant ? 0.0f : 1.0f / st.std;
        for (float& v : plane.values()) {
            v = std::isnan(v) ? 0.0f : (v - st.mean) * inv_std;
        }
        out.stack.channels.emplace_back(id, std::move(plane));
    }
    out.stack.validate();
    return out;
}

}  // namespace smcforge::features
