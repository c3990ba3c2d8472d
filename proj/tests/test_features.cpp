#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "smcforge/dates.hpp"
#include "smcforge/errors.hpp"
#include "smcforge/features.hpp"
#include "smcforge/rng.hpp"

using namespace smcforge;
using features::ChannelStats;
using raster::ChannelId;
using raster::Raster2D;

namespace {

constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();

raster::GridGeo geo(std::uint32_t w, std::uint32_t h) {
    raster::GridGeo g;
    g.width = w;
    g.height = h;
    g.pixel_size = 10.0;
    return g;
}

Raster2D scalar(float v) { return Raster2D(geo(1, 1), {v}); }

/// Stats with every feature channel present, distinct means/stds per channel
/// so scaling mistakes show up.
ChannelStats full_stats() {
    ChannelStats stats;
    for (std::size_t c = 0; c < raster::kFeatureChannelCount; ++c) {
        ChannelStats::Entry e;
        e.mean = 0.1f * static_cast<float>(c + 1);
        e.std = 0.5f + 0.05f * static_cast<float>(c);
        e.constant = false;
        stats.entries[static_cast<ChannelId>(c)] = e;
    }
    return stats;
}

const Raster2D& plane_of(const raster::RasterStack& stack, ChannelId id) {
    const Raster2D* p = stack.find(id);
    REQUIRE(p != nullptr);
    return *p;
}

}  // namespace

TEST_CASE("ndvi basic ratios") {
    CHECK(features::ndvi(scalar(0.5f), scalar(0.1f)).at(0, 0) ==
          doctest::Approx(0.4 / 0.6).epsilon(1e-6));
    CHECK(features::ndvi(scalar(0.3f), scalar(0.3f)).at(0, 0) == 0.0f);
    CHECK(std::isnan(features::ndvi(scalar(0.0f), scalar(0.0f)).at(0, 0)));
    CHECK(std::isnan(features::ndvi(scalar(kNaN), scalar(0.3f)).at(0, 0)));
    CHECK_THROWS_AS(features::ndvi(Raster2D::filled(geo(2, 2), 0.5f), scalar(0.1f)),
                    ValidationError);
}

TEST_CASE("ndvi stays within [-1, 1] for nonnegative reflectances") {
    rng::Sequence seq(11);
    for (int i = 0; i < 500; ++i) {
        const float n = static_cast<float>(seq.next_uniform01());
        const float r = static_cast<float>(seq.next_uniform01());
        const float v = features::ndvi(scalar(n), scalar(r)).at(0, 0);
        if (std::isnan(v)) continue;
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("to_db handles identities, the floor and bad input") {
    CHECK(features::to_db(scalar(1.0f)).at(0, 0) == 0.0f);
    CHECK(features::to_db(scalar(0.1f)).at(0, 0) == doctest::Approx(-10.0).epsilon(1e-6));
    CHECK(features::to_db(scalar(0.0f)).at(0, 0) == -60.0f);
    CHECK(features::to_db(scalar(1e-6f)).at(0, 0) == -60.0f);
    CHECK(std::isnan(features::to_db(scalar(kNaN)).at(0, 0)));
    CHECK_THROWS_AS(features::to_db(scalar(-0.5f)), ValidationError);
    // Round trip through the dB scale above the floor.
    for (float x : {2.5e-6f, 1e-3f, 0.07f, 0.9f, 3.0f}) {
        const float db = features::to_db(scalar(x)).at(0, 0);
        CHECK(std::pow(10.0, db / 10.0) == doctest::Approx(x).epsilon(1e-5));
    }
}

TEST_CASE("incidence normalization is the identity at the reference angle") {
    const Raster2D out = features::incidence_normalize(scalar(-12.5f), scalar(35.0f), 35.0f);
    CHECK(out.at(0, 0) == doctest::Approx(-12.5).epsilon(1e-7));
}

TEST_CASE("incidence normalization matches the cosine-squared formula") {
    // Independent f64 evaluation of sigma + 10*log10(cos^2 ref / cos^2 inc).
    const double deg = std::numbers::pi / 180.0;
    auto expected = [&](double sigma, double inc, double ref) {
        const double c_r = std::cos(ref * deg);
        const double c_i = std::cos(inc * deg);
        return sigma + 10.0 * std::log10((c_r * c_r) / (c_i * c_i));
    };
    CHECK(features::incidence_normalize(scalar(-10.0f), scalar(45.0f), 35.0f).at(0, 0) ==
          doctest::Approx(expected(-10.0, 45.0, 35.0)).epsilon(1e-5));
    CHECK(features::incidence_normalize(scalar(-7.25f), scalar(28.0f), 35.0f).at(0, 0) ==
          doctest::Approx(expected(-7.25, 28.0, 35.0)).epsilon(1e-5));
    // Steeper than reference brightens, shallower darkens.
    CHECK(features::incidence_normalize(scalar(-10.0f), scalar(45.0f), 35.0f).at(0, 0) > -10.0f);
    CHECK(features::incidence_normalize(scalar(-10.0f), scalar(25.0f), 35.0f).at(0, 0) < -10.0f);

    CHECK(std::isnan(features::incidence_normalize(scalar(kNaN), scalar(40.0f), 35.0f).at(0, 0)));
    CHECK_THROWS_AS(features::incidence_normalize(scalar(-10.0f), scalar(95.0f), 35.0f),
                    ValidationError);
    CHECK_THROWS_AS(features::incidence_normalize(scalar(-10.0f), scalar(40.0f), 0.0f),
                    ValidationError);
}

TEST_CASE("crop mask thresholds and counts") {
    const Raster2D uniform = Raster2D::filled(geo(3, 3), 0.6f);
    const Raster2D all_on = features::crop_mask(uniform, 0.3f);
    for (float v : all_on.values()) CHECK(v == 1.0f);
    const Raster2D floor_thr = features::crop_mask(uniform, -1.0f);
    for (float v : floor_thr.values()) CHECK(v == 1.0f);

    // Counting oracle on a ramp: the mask total must equal the number of
    // cells at or above the threshold, counted directly.
    const std::uint32_t n = 8;
    Raster2D ramp = Raster2D::filled(geo(n, n), 0.0f);
    for (std::size_t i = 0; i < ramp.size(); ++i) {
        ramp.values()[i] = static_cast<float>(i) / static_cast<float>(ramp.size() - 1);
    }
    const float threshold = 0.5f;
    std::size_t expect = 0;
    for (float v : ramp.values()) expect += v >= threshold ? 1 : 0;
    const Raster2D mask = features::crop_mask(ramp, threshold);
    double total = 0.0;
    for (float v : mask.values()) total += v;
    CHECK(total == static_cast<double>(expect));

    Raster2D with_nan = scalar(kNaN);
    CHECK(std::isnan(features::crop_mask(with_nan, 0.3f).at(0, 0)));
}

TEST_CASE("seasonal phase hits the quarter-year points") {
    const double quarter = 365.25 / 4.0;  // 91.3125
    const auto q = features::seasonal_phase(quarter);
    CHECK(q.sin_doy == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::fabs(q.cos_doy) < 1e-9);
    const auto full = features::seasonal_phase(365.25);
    CHECK(std::fabs(full.sin_doy) < 1e-9);
    CHECK(full.cos_doy == doctest::Approx(1.0).epsilon(1e-9));
    // sin^2 + cos^2 == 1 along the year.
    for (double d = 1.0; d < 366.0; d += 17.0) {
        const auto p = features::seasonal_phase(d);
        CHECK(p.sin_doy * p.sin_doy + p.cos_doy * p.cos_doy == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("channel stats match direct mean and std") {
    features::ChannelStatsBuilder builder;
    for (float v : {1.0f, 2.0f, 3.0f, 4.0f}) builder.add(ChannelId::VV_DB, v);
    builder.add(ChannelId::VV_DB, kNaN);  // ignored
    for (int i = 0; i < 5; ++i) builder.add(ChannelId::NDVI, 0.4f);
    const ChannelStats stats = builder.finalize();

    CHECK(stats.at(ChannelId::VV_DB).mean == doctest::Approx(2.5).epsilon(1e-7));
    CHECK(stats.at(ChannelId::VV_DB).std == doctest::Approx(std::sqrt(1.25)).epsilon(1e-6));
    CHECK(!stats.at(ChannelId::VV_DB).constant);
    CHECK(stats.at(ChannelId::NDVI).constant);
    CHECK(!stats.has(ChannelId::RED));
    CHECK_THROWS_AS(static_cast<void>(stats.at(ChannelId::RED)), ValidationError);
}

TEST_CASE("stats JSON round-trips") {
    features::ChannelStatsBuilder builder;
    rng::Sequence seq(5);
    for (int i = 0; i < 100; ++i) {
        builder.add(ChannelId::VV_DB, static_cast<float>(seq.next_uniform01() * 20.0 - 25.0));
        builder.add(ChannelId::NDVI, static_cast<float>(seq.next_uniform01()));
    }
    builder.add(ChannelId::DOY_SIN, 0.5f);
    const ChannelStats stats = builder.finalize();
    const auto p = std::filesystem::temp_directory_path() / "stats_rt.json";
    features::save_stats_json(stats, p);
    const ChannelStats loaded = features::load_stats_json(p);
    REQUIRE(loaded.entries.size() == stats.entries.size());
    for (const auto& [id, e] : stats.entries) {
        CHECK(loaded.at(id).mean == e.mean);
        CHECK(loaded.at(id).std == e.std);
        CHECK(loaded.at(id).constant == e.constant);
    }
    CHECK_THROWS_AS(features::load_stats_json("/nonexistent/stats.json"), IoError);
}

TEST_CASE("assemble_stack emits 14 fixed-order channels") {
    features::ChannelInputs inputs;
    inputs[ChannelId::VV_DB] = Raster2D::filled(geo(4, 4), -12.0f);
    const auto out = features::assemble_stack(inputs, 16436, full_stats(), features::StackMode::AE);
    REQUIRE(out.stack.channels.size() == raster::kFeatureChannelCount);
    for (std::size_t c = 0; c < raster::kFeatureChannelCount; ++c) {
        CHECK(out.stack.channels[c].first == raster::kFeatureChannels[c]);
    }
}

TEST_CASE("AE mode zeroes the ground channels even when inputs carry them") {
    features::ChannelInputs inputs;
    inputs[ChannelId::VV_DB] = Raster2D::filled(geo(4, 4), -12.0f);
    inputs[ChannelId::RAIN_MM] = Raster2D::filled(geo(4, 4), 9.0f);
    inputs[ChannelId::SMC_LAG] = Raster2D::filled(geo(4, 4), 0.3f);
    const auto out = features::assemble_stack(inputs, 16436, full_stats(), features::StackMode::AE);
    for (float v : plane_of(out.stack, ChannelId::RAIN_MM).values()) CHECK(v == 0.0f);
    for (float v : plane_of(out.stack, ChannelId::SMC_LAG).values()) CHECK(v == 0.0f);

    // FUSED keeps them, z-scored.
    const ChannelStats stats = full_stats();
    const auto fused = features::assemble_stack(inputs, 16436, stats, features::StackMode::FUSED);
    const auto& st = stats.at(ChannelId::RAIN_MM);
    CHECK(plane_of(fused.stack, ChannelId::RAIN_MM).at(0, 0) ==
          doctest::Approx((9.0f - st.mean) / st.std).epsilon(1e-6));
}

TEST_CASE("missing channels impute to the training mean, i.e. zero after scaling") {
    features::ChannelInputs inputs;
    inputs[ChannelId::VV_DB] = Raster2D::filled(geo(4, 4), -12.0f);
    inputs[ChannelId::VH_DB] = Raster2D::filled(geo(4, 4), -19.0f);
    const auto out = features::assemble_stack(inputs, 16436, full_stats(), features::StackMode::AE);
    for (float v : plane_of(out.stack, ChannelId::HH_DB).values()) CHECK(v == 0.0f);
    for (float v : plane_of(out.stack, ChannelId::HV_DB).values()) CHECK(v == 0.0f);
    bool hh_noted = false;
    bool hv_noted = false;
    for (ChannelId id : out.imputed) {
        hh_noted |= id == ChannelId::HH_DB;
        hv_noted |= id == ChannelId::HV_DB;
    }
    CHECK(hh_noted);
    CHECK(hv_noted);
    // Supplied channels are not in the imputed list.
    for (ChannelId id : out.imputed) CHECK(id != ChannelId::VV_DB);
}

TEST_CASE("a channel with no training statistics degrades to an imputed zero plane") {
    features::ChannelInputs inputs;
    inputs[ChannelId::VV_DB] = Raster2D::filled(geo(4, 4), -12.0f);
    inputs[ChannelId::HH_DB] = Raster2D::filled(geo(4, 4), -14.0f);  // plane present...
    ChannelStats partial = full_stats();
    partial.entries.erase(ChannelId::HH_DB);  // ...but never seen in training
    const auto out = features::assemble_stack(inputs, 16436, partial, features::StackMode::AE);
    for (float v : plane_of(out.stack, ChannelId::HH_DB).values()) CHECK(v == 0.0f);
    bool noted = false;
    for (ChannelId id : out.imputed) noted |= id == ChannelId::HH_DB;
    CHECK(noted);
}

TEST_CASE("NaN cells z-score to zero and NDVI derives from NIR and RED") {
    features::ChannelInputs inputs;
    Raster2D vv = Raster2D::filled(geo(2, 2), -12.0f);
    vv.set(1, 1, kNaN);
    inputs[ChannelId::VV_DB] = vv;
    inputs[ChannelId::NIR] = Raster2D::filled(geo(2, 2), 0.5f);
    inputs[ChannelId::RED] = Raster2D::filled(geo(2, 2), 0.1f);
    const ChannelStats stats = full_stats();
    const auto out = features::assemble_stack(inputs, 16436, stats, features::StackMode::AE);

    CHECK(plane_of(out.stack, ChannelId::VV_DB).at(1, 1) == 0.0f);
    const auto& st = stats.at(ChannelId::NDVI);
    const float raw_ndvi = 0.4f / 0.6f;
    CHECK(plane_of(out.stack, ChannelId::NDVI).at(0, 0) ==
          doctest::Approx((raw_ndvi - st.mean) / st.std).epsilon(1e-5));
    bool ndvi_imputed = false;
    for (ChannelId id : out.imputed) ndvi_imputed |= id == ChannelId::NDVI;
    CHECK(!ndvi_imputed);
}

TEST_CASE("DOY planes carry the date's seasonal phase") {
    features::ChannelInputs inputs;
    inputs[ChannelId::VV_DB] = Raster2D::filled(geo(2, 2), -12.0f);
    const std::int64_t date = dates::parse_iso_date("2015-04-01");  // doy 91
    const ChannelStats stats = full_stats();
    const auto out = features::assemble_stack(inputs, date, stats, features::StackMode::AE);
    const auto phase = features::seasonal_phase(dates::day_of_year(date));
    const auto& ss = stats.at(ChannelId::DOY_SIN);
    const auto& cs = stats.at(ChannelId::DOY_COS);
    CHECK(plane_of(out.stack, ChannelId::DOY_SIN).at(0, 0) ==
          doctest::Approx((static_cast<float>(phase.sin_doy) - ss.mean) / ss.std).epsilon(1e-5));
    CHECK(plane_of(out.stack, ChannelId::DOY_COS).at(1, 1) ==
          doctest::Approx((static_cast<float>(phase.cos_doy) - cs.mean) / cs.std).epsilon(1e-5));
}

TEST_CASE("z-scoring with training stats centers the training data") {
    // Build stats from synthetic draws, re-scale the same draws, check the
    // scaled population has mean ~0 and std ~1.
    rng::Sequence seq(21);
    features::ChannelStatsBuilder builder;
    std::vector<float> draws(2000);
    for (auto& v : draws) {
        v = static_cast<float>(-14.0 + 5.0 * seq.next_uniform01());
        builder.add(ChannelId::VV_DB, v);
    }
    ChannelStats stats = full_stats();
    stats.entries[ChannelId::VV_DB] = builder.finalize().at(ChannelId::VV_DB);

    const auto& e = stats.at(ChannelId::VV_DB);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (float v : draws) {
        const double z = (v - e.mean) / e.std;
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / static_cast<double>(draws.size());
    const double var = sum_sq / static_cast<double>(draws.size()) - mean * mean;
    CHECK(std::fabs(mean) < 1e-4);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));

    // Constant channels scale to exactly zero rather than dividing by 0.
    ChannelStats const_stats = full_stats();
    const_stats.entries[ChannelId::VV_DB] = {-12.0f, 0.0f, true};
    features::ChannelInputs inputs;
    inputs[ChannelId::VV_DB] = Raster2D::filled(geo(2, 2), -12.0f);
    const auto out =
        features::assemble_stack(inputs, 16436, const_stats, features::StackMode::AE);
    for (float v : plane_of(out.stack, ChannelId::VV_DB).values()) CHECK(v == 0.0f);
}

TEST_CASE("assemble_stack rejects empty and mismatched inputs") {
    CHECK_THROWS_AS(
        features::assemble_stack({}, 16436, full_stats(), features::StackMode::AE),
        ValidationError);
    features::ChannelInputs inputs;
    inputs[ChannelId::VV_DB] = Raster2D::filled(geo(2, 2), -12.0f);
    inputs[ChannelId::VH_DB] = Raster2D::filled(geo(3, 3), -19.0f);
    CHECK_THROWS_AS(
        features::assemble_stack(inputs, 16436, full_stats(), features::StackMode::AE),
        ValidationError);
}
