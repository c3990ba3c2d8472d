#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "smcforge/dates.hpp"
#include "smcforge/errors.hpp"
#include "smcforge/ingest.hpp"
#include "smcforge/raster.hpp"

using namespace smcforge;
using ingest::Qc;
using ingest::SmcFlag;
using raster::ChannelId;
using raster::Raster2D;

namespace {

std::filesystem::path write_text(const char* name, const std::string& content) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream out(p, std::ios::trunc);
    out << content;
    return p;
}

raster::GridGeo small_geo() {
    raster::GridGeo g;
    g.width = 4;
    g.height = 4;
    g.pixel_size = 10.0;
    return g;
}

/// One-channel EO series with stacks on the given days.
raster::SceneSeries eo_on_days(const std::vector<std::int64_t>& days) {
    raster::SceneSeries series;
    series.cadence_days = 1;
    for (std::int64_t d : days) {
        raster::RasterStack stack;
        stack.timestamp = d;
        stack.channels.emplace_back(ChannelId::VV_DB, Raster2D::filled(small_geo(), -12.0f));
        series.stacks.push_back(std::move(stack));
    }
    return series;
}

ingest::SensorRecord sensor(const char* site, std::int64_t day, float smc) {
    ingest::SensorRecord r;
    r.site_id = site;
    r.date = day;
    r.depth_cm = 30.0f;
    r.smc = smc;
    r.qc = Qc::OK;
    return r;
}

ingest::WeatherRecord weather_on(std::int64_t day, float rain = 0.0f) {
    ingest::WeatherRecord r;
    r.date = day;
    r.rain_mm = rain;
    r.et0_mm = 3.0f;
    r.tmin_c = 10.0f;
    r.tmax_c = 20.0f;
    return r;
}

std::vector<ingest::WeatherRecord> weather_span(std::int64_t lo, std::int64_t hi) {
    std::vector<ingest::WeatherRecord> out;
    for (std::int64_t d = lo; d <= hi; ++d) out.push_back(weather_on(d));
    return out;
}

ingest::SiteMeta site_at(const char* id, std::uint32_t px, std::uint32_t py) {
    ingest::SiteMeta s;
    s.site_id = id;
    s.region_id = "R1";
    s.px = px;
    s.py = py;
    s.crop_label = "crop1";
    return s;
}

}  // namespace

TEST_CASE("sensor CSV row parses field by field") {
    const auto p = write_text("sensors_ok.csv",
                              "site_id,date,depth_cm,smc_m3m3,qc\n"
                              "S01,2015-03-02,30,0.213,OK\n");
    const auto records = ingest::load_sensor_csv(p);
    REQUIRE(records.size() == 1);
    CHECK(records[0].site_id == "S01");
    CHECK(records[0].date == dates::parse_iso_date("2015-03-02"));
    CHECK(records[0].depth_cm == 30.0f);
    CHECK(records[0].smc == 0.213f);
    CHECK(records[0].qc == Qc::OK);
}

TEST_CASE("sensor smc outside [0,1] with qc OK is rejected with its line number") {
    const auto p = write_text("sensors_range.csv",
                              "site_id,date,depth_cm,smc_m3m3,qc\n"
                              "S01,2015-03-02,30,0.2,OK\n"
                              "S01,2015-03-03,30,1.5,OK\n");
    try {
        ingest::load_sensor_csv(p);
        FAIL("expected range error");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(":3:") != std::string::npos);  // header is line 1
        CHECK(msg.find("[0,1]") != std::string::npos);
    }
    // SUSPECT rows may carry out-of-range values; they are kept but unused.
    const auto p2 = write_text("sensors_suspect.csv",
                               "site_id,date,depth_cm,smc_m3m3,qc\n"
                               "S01,2015-03-03,30,1.5,SUSPECT\n");
    CHECK(ingest::load_sensor_csv(p2).size() == 1);
}

TEST_CASE("empty sensor file with a valid header yields an empty list") {
    const auto p = write_text("sensors_empty.csv", "site_id,date,depth_cm,smc_m3m3,qc\n");
    CHECK(ingest::load_sensor_csv(p).empty());
}

TEST_CASE("malformed headers and missing files are rejected") {
    const auto p = write_text("sensors_header.csv", "site,when,how_deep\nS01,2015-01-01,30\n");
    CHECK_THROWS_AS(ingest::load_sensor_csv(p), ValidationError);
    CHECK_THROWS_AS(ingest::load_sensor_csv("/nonexistent/sensors.csv"), IoError);
    const auto empty = write_text("sensors_zero.csv", "");
    CHECK_THROWS_AS(ingest::load_sensor_csv(empty), ValidationError);
}

TEST_CASE("weather rows with tmin above tmax are rejected") {
    const auto p = write_text("weather_bad.csv",
                              "date,rain_mm,et0_mm,tmin_c,tmax_c\n"
                              "2015-01-01,0,3.2,25,15\n");
    try {
        ingest::load_weather_csv(p);
        FAIL("expected tmin/tmax error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    const auto neg = write_text("weather_neg.csv",
                                "date,rain_mm,et0_mm,tmin_c,tmax_c\n"
                                "2015-01-01,-2,3.2,5,15\n");
    CHECK_THROWS_AS(ingest::load_weather_csv(neg), ValidationError);
}

TEST_CASE("duplicate site ids are rejected") {
    const auto p = write_text("sites_dup.csv",
                              "site_id,region_id,px,py,crop_label\n"
                              "S01,R1,2,3,crop1\n"
                              "S01,R2,4,5,crop2\n");
    CHECK_THROWS_AS(ingest::load_sites_csv(p), ValidationError);
}

TEST_CASE("CSV writers round-trip through their loaders") {
    std::vector<ingest::SensorRecord> sensors = {sensor("S01", 16436, 0.2371f),
                                                 sensor("S02", 16437, 0.05f)};
    sensors[1].qc = Qc::SUSPECT;
    const auto sp = std::filesystem::temp_directory_path() / "rt_sensors.csv";
    ingest::write_sensor_csv(sensors, sp);
    const auto sensors2 = ingest::load_sensor_csv(sp);
    REQUIRE(sensors2.size() == 2);
    CHECK(sensors2[0].smc == sensors[0].smc);
    CHECK(sensors2[1].qc == Qc::SUSPECT);

    std::vector<ingest::WeatherRecord> weather = {weather_on(16436, 12.625f)};
    weather[0].tmin_c = -3.5f;
    const auto wp = std::filesystem::temp_directory_path() / "rt_weather.csv";
    ingest::write_weather_csv(weather, wp);
    const auto weather2 = ingest::load_weather_csv(wp);
    REQUIRE(weather2.size() == 1);
    CHECK(weather2[0].rain_mm == 12.625f);
    CHECK(weather2[0].tmin_c == -3.5f);

    std::vector<ingest::SiteMeta> sites = {site_at("S01", 3, 1)};
    const auto tp = std::filesystem::temp_directory_path() / "rt_sites.csv";
    ingest::write_sites_csv(sites, tp);
    const auto sites2 = ingest::load_sites_csv(tp);
    REQUIRE(sites2.size() == 1);
    CHECK(sites2[0].px == 3);
    CHECK(sites2[0].py == 1);
}

TEST_CASE("one-day sensor gaps interpolate to the linear midpoint") {
    const std::vector<ingest::SiteMeta> sites = {site_at("S01", 0, 0)};
    const std::vector<ingest::SensorRecord> sensors = {sensor("S01", 100, 0.2f),
                                                       sensor("S01", 102, 0.4f)};
    const auto ds = ingest::align_daily(sites, sensors, weather_span(100, 102), eo_on_days({100}));
    REQUIRE(ds.n_days() == 3);
    CHECK(ds.site_flag[0][0] == SmcFlag::OK);
    CHECK(ds.site_flag[0][1] == SmcFlag::INTERPOLATED);
    CHECK(ds.site_flag[0][2] == SmcFlag::OK);
    CHECK(ds.site_smc[0][1] == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("gaps longer than the limit stay missing") {
    const std::vector<ingest::SiteMeta> sites = {site_at("S01", 0, 0)};
    const std::vector<ingest::SensorRecord> sensors = {sensor("S01", 100, 0.2f),
                                                       sensor("S01", 110, 0.4f)};
    const auto ds =
        ingest::align_daily(sites, sensors, weather_span(100, 110), eo_on_days({100}), 3);
    REQUIRE(ds.n_days() == 11);
    for (std::size_t i = 1; i <= 9; ++i) {
        CHECK(ds.site_flag[0][i] == SmcFlag::MISSING);
        CHECK(std::isnan(ds.site_smc[0][i]));
    }
    // A 3-day hole is still within the limit and gets filled.
    const std::vector<ingest::SensorRecord> short_gap = {sensor("S01", 100, 0.2f),
                                                         sensor("S01", 104, 0.4f)};
    const auto ds2 =
        ingest::align_daily(sites, short_gap, weather_span(100, 104), eo_on_days({100}), 3);
    for (std::size_t i = 1; i <= 3; ++i) CHECK(ds2.site_flag[0][i] == SmcFlag::INTERPOLATED);
    CHECK(ds2.site_smc[0][2] == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("EO stacks forward-fill with their age recorded") {
    const std::vector<ingest::SiteMeta> sites = {site_at("S01", 0, 0)};
    std::vector<ingest::SensorRecord> sensors;
    for (std::int64_t d = 100; d <= 104; ++d) sensors.push_back(sensor("S01", d, 0.25f));
    const auto ds = ingest::align_daily(sites, sensors, weather_span(100, 104), eo_on_days({100}));
    REQUIRE(ds.n_days() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(ds.stack_index[i] == 0);
        CHECK(ds.stack_age[i] == static_cast<std::int32_t>(i));
        CHECK(ds.channel_age[i][static_cast<std::size_t>(ChannelId::VV_DB)] ==
              static_cast<std::int32_t>(i));
    }
}

TEST_CASE("per-channel fill skips all-NaN planes in merged stacks") {
    // Day 100 carries radar only, day 101 optical only, one shared channel
    // list with NaN planes standing in for the sensor that did not acquire.
    raster::SceneSeries series;
    series.cadence_days = 1;
    {
        raster::RasterStack s;
        s.timestamp = 100;
        s.channels.emplace_back(ChannelId::VV_DB, Raster2D::filled(small_geo(), -12.0f));
        s.channels.emplace_back(ChannelId::RED, Raster2D::filled(small_geo()));  // NaN
        series.stacks.push_back(std::move(s));
    }
    {
        raster::RasterStack s;
        s.timestamp = 101;
        s.channels.emplace_back(ChannelId::VV_DB, Raster2D::filled(small_geo()));  // NaN
        s.channels.emplace_back(ChannelId::RED, Raster2D::filled(small_geo(), 0.1f));
        series.stacks.push_back(std::move(s));
    }
    const std::vector<ingest::SiteMeta> sites = {site_at("S01", 0, 0)};
    std::vector<ingest::SensorRecord> sensors;
    for (std::int64_t d = 100; d <= 102; ++d) sensors.push_back(sensor("S01", d, 0.25f));
    const auto ds = ingest::align_daily(sites, sensors, weather_span(100, 102), series);

    const auto vv = static_cast<std::size_t>(ChannelId::VV_DB);
    const auto red = static_cast<std::size_t>(ChannelId::RED);
    CHECK(ds.channel_source[0][vv] == 0);
    CHECK(ds.channel_source[0][red] == -1);  // optical not seen yet
    CHECK(ds.channel_source[1][vv] == 0);    // NaN plane on day 101 does not supply VV
    CHECK(ds.channel_source[1][red] == 1);
    CHECK(ds.channel_age[2][vv] == 2);
    CHECK(ds.channel_age[2][red] == 1);
}

TEST_CASE("empty overlap between sources is an error") {
    const std::vector<ingest::SiteMeta> sites = {site_at("S01", 0, 0)};
    const std::vector<ingest::SensorRecord> sensors = {sensor("S01", 50, 0.2f),
                                                       sensor("S01", 60, 0.3f)};
    CHECK_THROWS_AS(
        ingest::align_daily(sites, sensors, weather_span(100, 110), eo_on_days({50})),
        ValidationError);
}

TEST_CASE("weather holes and duplicates inside the window are errors") {
    const std::vector<ingest::SiteMeta> sites = {site_at("S01", 0, 0)};
    std::vector<ingest::SensorRecord> sensors;
    for (std::int64_t d = 100; d <= 104; ++d) sensors.push_back(sensor("S01", d, 0.25f));

    auto holey = weather_span(100, 104);
    holey.erase(holey.begin() + 2);  // drop day 102
    CHECK_THROWS_AS(ingest::align_daily(sites, sensors, holey, eo_on_days({100})),
                    ValidationError);

    auto doubled = weather_span(100, 104);
    doubled.push_back(weather_on(103));
    CHECK_THROWS_AS(ingest::align_daily(sites, sensors, doubled, eo_on_days({100})),
                    ValidationError);
}

TEST_CASE("alignment never extrapolates beyond a site's readings") {
    const std::vector<ingest::SiteMeta> sites = {site_at("S01", 0, 0), site_at("S02", 1, 0)};
    std::vector<ingest::SensorRecord> sensors;
    for (std::int64_t d = 100; d <= 104; ++d) sensors.push_back(sensor("S01", d, 0.25f));
    for (std::int64_t d = 101; d <= 103; ++d) sensors.push_back(sensor("S02", d, 0.30f));
    const auto ds = ingest::align_daily(sites, sensors, weather_span(100, 104), eo_on_days({100}));
    REQUIRE(ds.n_days() == 5);
    CHECK(ds.site_flag[1][0] == SmcFlag::MISSING);  // before S02's first reading
    CHECK(ds.site_flag[1][4] == SmcFlag::MISSING);  // after its last
    CHECK(ds.site_flag[1][2] == SmcFlag::OK);
    // Days are contiguous and weather rows line up one-to-one.
    for (std::size_t i = 0; i < ds.n_days(); ++i) {
        CHECK(ds.days[i] == 100 + static_cast<std::int64_t>(i));
        CHECK(ds.weather[i].date == ds.days[i]);
    }
    CHECK(ds.index_of(102) == 2);
    CHECK(ds.index_of(99) == -1);
}

TEST_CASE("sites outside the EO grid are rejected") {
    const std::vector<ingest::SiteMeta> sites = {site_at("S01", 9, 0)};  // grid is 4x4
    const std::vector<ingest::SensorRecord> sensors = {sensor("S01", 100, 0.2f)};
    CHECK_THROWS_AS(ingest::align_daily(sites, sensors, weather_span(100, 101), eo_on_days({100})),
                    ValidationError);
}
