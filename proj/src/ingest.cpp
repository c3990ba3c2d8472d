#include "smcforge/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "smcforge/dates.hpp"
#include "smcforge/errors.hpp"

namespace smcforge::ingest {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

struct CsvFile {
    std::filesystem::path path;
    std::vector<std::string> lines;  // data rows, header removed
    std::size_t header_lineno = 1;

    [[noreturn]] void fail(std::size_t data_index, const std::string& reason) const {
        throw ValidationError(path.string() + ":" +
                              std::to_string(header_lineno + 1 + data_index) + ": " + reason);
    }
};

CsvFile read_csv(const std::filesystem::path& path, const std::string& expected_header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    CsvFile file;
    file.path = path;
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError(path.string() + ": empty file, expected header '" + expected_header +
                              "'");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header) {
        throw ValidationError(path.string() + ": bad header '" + line + "', expected '" +
                              expected_header + "'");
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        file.lines.push_back(line);
    }
    return file;
}

float parse_float(const CsvFile& file, std::size_t row, const std::string& field,
                  const char* name) {
    float value = 0.0f;
    const char* first = field.data();
    auto [ptr, ec] = std::from_chars(first, first + field.size(), value);
    if (ec != std::errc{} || ptr != first + field.size()) {
        file.fail(row, std::string("unparseable ") + name + " '" + field + "'");
    }
    return value;
}

std::uint32_t parse_u32(const CsvFile& file, std::size_t row, const std::string& field,
                        const char* name) {
    std::uint32_t value = 0;
    const char* first = field.data();
    auto [ptr, ec] = std::from_chars(first, first + field.size(), value);
    if (ec != std::errc{} || ptr != first + field.size()) {
        file.fail(row, std::string("unparseable ") + name + " '" + field + "'");
    }
    return value;
}

std::int64_t parse_date_field(const CsvFile& file, std::size_t row, const std::string& field) {
    try {
        return dates::parse_iso_date(field);
    } catch (const ValidationError& e) {
        file.fail(row, e.what());
    }
}

std::string format_float(float v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
    return buf;
}

const char* qc_name(Qc qc) {
    switch (qc) {
        case Qc::OK: return "OK";
        case Qc::SUSPECT: return "SUSPECT";
        case Qc::MISSING: return "MISSING";
    }
    return "OK";
}

}  // namespace

std::vector<SensorRecord> load_sensor_csv(const std::filesystem::path& path) {
    const CsvFile file = read_csv(path, "site_id,date,depth_cm,smc_m3m3,qc");
    std::vector<SensorRecord> records;
    records.reserve(file.lines.size());
    for (std::size_t i = 0; i < file.lines.size(); ++i) {
        const std::vector<std::string> f = split_fields(file.lines[i]);
        if (f.size() != 5) file.fail(i, "expected 5 fields, got " + std::to_string(f.size()));
        SensorRecord rec;
        rec.site_id = f[0];
        if (rec.site_id.empty()) file.fail(i, "empty site_id");
        rec.date = parse_date_field(file, i, f[1]);
        rec.depth_cm = parse_float(file, i, f[2], "depth_cm");
        rec.smc = parse_float(file, i, f[3], "smc_m3m3");
        if (f[4] == "OK") rec.qc = Qc::OK;
        else if (f[4] == "SUSPECT") rec.qc = Qc::SUSPECT;
        else if (f[4] == "MISSING") rec.qc = Qc::MISSING;
        else file.fail(i, "unknown qc '" + f[4] + "'");
        if (rec.qc == Qc::OK && !(rec.smc >= 0.0f && rec.smc <= 1.0f)) {
            file.fail(i, "smc " + f[3] + " outside [0,1] with qc=OK");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<WeatherRecord> load_weather_csv(const std::filesystem::path& path) {
    const CsvFile file = read_csv(path, "date,rain_mm,et0_mm,tmin_c,tmax_c");
    std::vector<WeatherRecord> records;
    records.reserve(file.lines.size());
    for (std::size_t i = 0; i < file.lines.size(); ++i) {
        const std::vector<std::string> f = split_fields(file.lines[i]);
        if (f.size() != 5) file.fail(i, "expected 5 fields, got " + std::to_string(f.size()));
        WeatherRecord rec;
        rec.date = parse_date_field(file, i, f[0]);
        rec.rain_mm = parse_float(file, i, f[1], "rain_mm");
        rec.et0_mm = parse_float(file, i, f[2], "et0_mm");
        rec.tmin_c = parse_float(file, i, f[3], "tmin_c");
        rec.tmax_c = parse_float(file, i, f[4], "tmax_c");
        if (rec.rain_mm < 0.0f) file.fail(i, "negative rain_mm");
        if (rec.et0_mm < 0.0f) file.fail(i, "negative et0_mm");
        if (rec.tmin_c > rec.tmax_c) file.fail(i, "tmin_c above tmax_c");
        records.push_back(rec);
    }
    return records;
}

std::vector<SiteMeta> load_sites_csv(const std::filesystem::path& path) {
    const CsvFile file = read_csv(path, "site_id,region_id,px,py,crop_label");
    std::vector<SiteMeta> sites;
    sites.reserve(file.lines.size());
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < file.lines.size(); ++i) {
        const std::vector<std::string> f = split_fields(file.lines[i]);
        if (f.size() != 5) file.fail(i, "expected 5 fields, got " + std::to_string(f.size()));
        SiteMeta site;
        site.site_id = f[0];
        if (site.site_id.empty()) file.fail(i, "empty site_id");
        if (!seen.insert(site.site_id).second) file.fail(i, "duplicate site_id '" + f[0] + "'");
        site.region_id = f[1];
        site.px = parse_u32(file, i, f[2], "px");
        site.py = parse_u32(file, i, f[3], "py");
        site.crop_label = f[4];
        sites.push_back(std::move(site));
    }
    return sites;
}

void write_sensor_csv(const std::vector<SensorRecord>& records,
                      const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "site_id,date,depth_cm,smc_m3m3,qc\n";
    for (const SensorRecord& r : records) {
        out << r.site_id << ',' << dates::format_iso_date(r.date) << ',' << format_float(r.depth_cm)
            << ',' << format_float(r.smc) << ',' << qc_name(r.qc) << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_weather_csv(const std::vector<WeatherRecord>& records,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "date,rain_mm,et0_mm,tmin_c,tmax_c\n";
    for (const WeatherRecord& r : records) {
        out << dates::format_iso_date(r.date) << ',' << format_float(r.rain_mm) << ','
            << format_float(r.et0_mm) << ',' << format_float(r.tmin_c) << ','
            << format_float(r.tmax_c) << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_sites_csv(const std::vector<SiteMeta>& sites, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "site_id,region_id,px,py,crop_label\n";
    for (const SiteMeta& s : sites) {
        out << s.site_id << ',' << s.region_id << ',' << s.px << ',' << s.py << ',' << s.crop_label
            << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

AlignedDataset align_daily(const std::vector<SiteMeta>& sites,
                           const std::vector<SensorRecord>& sensors,
                           const std::vector<WeatherRecord>& weather,
                           const raster::SceneSeries& series, std::uint32_t max_gap_days) {
    series.validate();
    if (sensors.empty()) throw ValidationError("align_daily: no sensor records");
    if (weather.empty()) throw ValidationError("align_daily: no weather records");
    for (const SiteMeta& site : sites) {
        if (site.px >= series.geo().width || site.py >= series.geo().height) {
            throw ValidationError("align_daily: site '" + site.site_id + "' pixel (" +
                                  std::to_string(site.px) + "," + std::to_string(site.py) +
                                  ") outside grid");
        }
    }

    auto minmax_date = [](auto const& rows, auto get) {
        std::int64_t lo = std::numeric_limits<std::int64_t>::max();
        std::int64_t hi = std::numeric_limits<std::int64_t>::min();
        for (const auto& r : rows) {
            lo = std::min(lo, get(r));
            hi = std::max(hi, get(r));
        }
        return std::pair{lo, hi};
    };
    const auto [sensor_lo, sensor_hi] = minmax_date(sensors, [](const SensorRecord& r) { return r.date; });
    const auto [weather_lo, weather_hi] = minmax_date(weather, [](const WeatherRecord& r) { return r.date; });
    const std::int64_t eo_lo = series.stacks.front().timestamp;

    // Forward fill has no end, so EO only constrains the window start.
    const std::int64_t day0 = std::max({sensor_lo, weather_lo, eo_lo});
    const std::int64_t day1 = std::min(sensor_hi, weather_hi);
    if (day0 > day1) {
        throw ValidationError("align_daily: empty overlap between sensors, weather and EO");
    }
    const std::size_t n_days = static_cast<std::size_t>(day1 - day0 + 1);

    AlignedDataset out;
    out.sites = sites;
    out.days.resize(n_days);
    for (std::size_t i = 0; i < n_days; ++i) out.days[i] = day0 + static_cast<std::int64_t>(i);

    // Weather: exactly one record per day inside the window.
    out.weather.resize(n_days);
    std::vector<bool> have_weather(n_days, false);
    for (const WeatherRecord& r : weather) {
        const std::int64_t idx = r.date - day0;
        if (idx < 0 || idx >= static_cast<std::int64_t>(n_days)) continue;
        if (have_weather[static_cast<std::size_t>(idx)]) {
            throw ValidationError("align_daily: duplicate weather record for " +
                                  dates::format_iso_date(r.date));
        }
        have_weather[static_cast<std::size_t>(idx)] = true;
        out.weather[static_cast<std::size_t>(idx)] = r;
    }
    for (std::size_t i = 0; i < n_days; ++i) {
        if (!have_weather[i]) {
            throw ValidationError("align_daily: weather missing for " +
                                  dates::format_iso_date(out.days[i]));
        }
    }

    // EO forward fill, whole stacks and per channel.
    out.stack_index.assign(n_days, -1);
    out.stack_age.assign(n_days, 0);
    std::array<std::int32_t, raster::kChannelCount> none{};
    none.fill(-1);
    out.channel_source.assign(n_days, none);
    out.channel_age.assign(n_days, none);

    // A stack supplies a channel only when the plane has a valid cell.
    std::vector<std::array<bool, raster::kChannelCount>> supplies(series.stacks.size());
    for (std::size_t s = 0; s < series.stacks.size(); ++s) {
        supplies[s].fill(false);
        for (const auto& [cid, plane] : series.stacks[s].channels) {
            supplies[s][static_cast<std::size_t>(cid)] = plane.mean_valid().has_value();
        }
    }

    std::size_t next_stack = 0;
    std::int32_t last_stack = -1;
    std::array<std::int32_t, raster::kChannelCount> last_channel = none;
    for (std::size_t i = 0; i < n_days; ++i) {
        const std::int64_t day = out.days[i];
        while (next_stack < series.stacks.size() && series.stacks[next_stack].timestamp <= day) {
            last_stack = static_cast<std::int32_t>(next_stack);
            for (std::size_t c = 0; c < raster::kChannelCount; ++c) {
                if (supplies[next_stack][c]) last_channel[c] = static_cast<std::int32_t>(next_stack);
            }
            ++next_stack;
        }
        out.stack_index[i] = last_stack;
        out.stack_age[i] = last_stack < 0 ? 0
                                          : static_cast<std::int32_t>(
                                                day - series.stacks[static_cast<std::size_t>(last_stack)].timestamp);
        out.channel_source[i] = last_channel;
        for (std::size_t c = 0; c < raster::kChannelCount; ++c) {
            const std::int32_t src = last_channel[c];
            out.channel_age[i][c] =
                src < 0 ? -1
                        : static_cast<std::int32_t>(day - series.stacks[static_cast<std::size_t>(src)].timestamp);
        }
    }

    // Per-site daily sensor series.
    std::unordered_map<std::string, std::size_t> site_index;
    for (std::size_t s = 0; s < sites.size(); ++s) site_index[sites[s].site_id] = s;

    out.site_smc.assign(sites.size(), std::vector<float>(n_days, std::numeric_limits<float>::quiet_NaN()));
    out.site_flag.assign(sites.size(), std::vector<SmcFlag>(n_days, SmcFlag::MISSING));

    for (const SensorRecord& r : sensors) {
        if (r.qc != Qc::OK) continue;
        const auto it = site_index.find(r.site_id);
        if (it == site_index.end()) continue;  // sensors for unknown sites are ignored
        const std::int64_t idx = r.date - day0;
        if (idx < 0 || idx >= static_cast<std::int64_t>(n_days)) continue;
        out.site_smc[it->second][static_cast<std::size_t>(idx)] = r.smc;
        out.site_flag[it->second][static_cast<std::size_t>(idx)] = SmcFlag::OK;
    }

    // Close short gaps by linear interpolation; never extrapolate.
    for (std::size_t s = 0; s < sites.size(); ++s) {
        auto& smc = out.site_smc[s];
        auto& flag = out.site_flag[s];
        std::int64_t prev_ok = -1;
        for (std::size_t i = 0; i < n_days; ++i) {
            if (flag[i] != SmcFlag::OK) continue;
            if (prev_ok >= 0) {
                const std::int64_t gap = static_cast<std::int64_t>(i) - prev_ok - 1;
                if (gap >= 1 && gap <= static_cast<std::int64_t>(max_gap_days)) {
                    const float v0 = smc[static_cast<std::size_t>(prev_ok)];
                    const float v1 = smc[i];
                    for (std::int64_t j = prev_ok + 1; j < static_cast<std::int64_t>(i); ++j) {
                        const double t = static_cast<double>(j - prev_ok) /
                                         static_cast<double>(i - static_cast<std::size_t>(prev_ok));
                        smc[static_cast<std::size_t>(j)] =
                            static_cast<float>(v0 + (v1 - v0) * t);
                        flag[static_cast<std::size_t>(j)] = SmcFlag::INTERPOLATED;
                    }
                }
            }
            prev_ok = static_cast<std::int64_t>(i);
        }
    }

    return out;
}

}  // namespace smcforge::ingest
