#include "smcforge/cube_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace smcforge::raster {

namespace {

void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
}

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
    }
    put_bytes(out, raw, sizeof(T));
}

class Cursor {
public:
    Cursor(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    template <class T>
    T get_le(const char* what) {
        need(sizeof(T), what);
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) {
            for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
        }
        pos_ += sizeof(T);
        T value;
        std::memcpy(&value, raw, sizeof(T));
        return value;
    }

    void need(std::size_t n, const char* what) const {
        if (pos_ + n > bytes_.size()) {
            throw TruncatedFileError("SMC1 truncated in " + std::string(what) + ": need " +
                                     std::to_string(pos_ + n) + " bytes, file has " +
                                     std::to_string(bytes_.size()));
        }
    }

    const std::uint8_t* here() const { return bytes_.data() + pos_; }
    void skip(std::size_t n) { pos_ += n; }
    std::size_t pos() const { return pos_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

constexpr char kMagic[4] = {'S', 'M', 'C', '1'};

std::vector<ChannelId> uniform_channel_list(const SceneSeries& series) {
    std::vector<ChannelId> ids;
    ids.reserve(series.stacks.front().channels.size());
    for (const auto& [cid, plane] : series.stacks.front().channels) ids.push_back(cid);
    for (const RasterStack& stack : series.stacks) {
        if (stack.channels.size() != ids.size()) {
            throw ValidationError("cube: stacks carry differing channel lists");
        }
        for (std::size_t c = 0; c < ids.size(); ++c) {
            if (stack.channels[c].first != ids[c]) {
                throw ValidationError("cube: stacks carry differing channel lists");
            }
        }
    }
    return ids;
}

}  // namespace

std::uint64_t cube_file_size(std::uint64_t t, std::uint64_t h, std::uint64_t w,
                             const std::vector<ChannelId>& channels) {
    std::uint64_t size = 4 + 2 + 2 + 4 * 4 + 3 * 8;  // fixed header
    size += 8 * t;                                    // timestamps
    for (ChannelId id : channels) size += 1 + channel_name(id).size();
    size += 4 * t * channels.size() * h * w;
    return size;
}

std::vector<std::uint8_t> cube_serialize(const SceneSeries& series) {
    series.validate();
    const std::vector<ChannelId> ids = uniform_channel_list(series);
    const GridGeo& geo = series.geo();

    std::vector<std::uint8_t> out;
    out.reserve(cube_file_size(series.stacks.size(), geo.height, geo.width, ids));

    put_bytes(out, kMagic, 4);
    put_le<std::uint16_t>(out, kCubeFormatVersion);
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(ids.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(series.stacks.size()));
    put_le<std::uint32_t>(out, geo.height);
    put_le<std::uint32_t>(out, geo.width);
    put_le<std::uint32_t>(out, series.cadence_days);
    put_le<double>(out, geo.origin_x);
    put_le<double>(out, geo.origin_y);
    put_le<double>(out, geo.pixel_size);
    for (const RasterStack& stack : series.stacks) put_le<std::int64_t>(out, stack.timestamp);
    for (ChannelId id : ids) {
        const std::string_view name = channel_name(id);
        put_le<std::uint8_t>(out, static_cast<std::uint8_t>(name.size()));
        put_bytes(out, name.data(), name.size());
    }
    for (const RasterStack& stack : series.stacks) {
        for (const auto& [cid, plane] : stack.channels) {
            for (float v : plane.values()) put_le<float>(out, v);
        }
    }
    return out;
}

SceneSeries cube_parse(const std::vector<std::uint8_t>& bytes) {
    Cursor cur(bytes);
    cur.need(4, "magic");
    if (std::memcmp(cur.here(), kMagic, 4) != 0) {
        throw BadMagicError("not an SMC1 file (bad magic)");
    }
    cur.skip(4);
    const auto version = cur.get_le<std::uint16_t>("version");
    if (version != kCubeFormatVersion) {
        throw FormatVersionError("SMC1 version " + std::to_string(version) + " unsupported (want " +
                                 std::to_string(kCubeFormatVersion) + ")");
    }
    const auto channel_count = cur.get_le<std::uint16_t>("channel count");
    const auto t = cur.get_le<std::uint32_t>("T");
    const auto h = cur.get_le<std::uint32_t>("H");
    const auto w = cur.get_le<std::uint32_t>("W");
    const auto cadence = cur.get_le<std::uint32_t>("cadence");
    GridGeo geo;
    geo.origin_x = cur.get_le<double>("origin_x");
    geo.origin_y = cur.get_le<double>("origin_y");
    geo.pixel_size = cur.get_le<double>("pixel_size");
    geo.width = w;
    geo.height = h;
    if (t == 0 || channel_count == 0 || !geo.valid()) {
        throw CubeFormatError("SMC1 header describes an empty or invalid cube");
    }

    std::vector<std::int64_t> timestamps(t);
    for (auto& ts : timestamps) ts = cur.get_le<std::int64_t>("timestamps");

    std::vector<ChannelId> ids(channel_count);
    for (auto& id : ids) {
        const auto len = cur.get_le<std::uint8_t>("channel name length");
        cur.need(len, "channel name");
        std::string name(reinterpret_cast<const char*>(cur.here()), len);
        cur.skip(len);
        id = channel_from_name(name);
    }

    const std::uint64_t plane_count = static_cast<std::uint64_t>(t) * channel_count;
    const std::uint64_t plane_size = static_cast<std::uint64_t>(h) * w;
    cur.need(plane_count * plane_size * 4, "payload");

    SceneSeries series;
    series.cadence_days = cadence;
    series.stacks.reserve(t);
    for (std::uint32_t ti = 0; ti < t; ++ti) {
        RasterStack stack;
        stack.timestamp = timestamps[ti];
        stack.channels.reserve(channel_count);
        for (ChannelId id : ids) {
            std::vector<float> values(plane_size);
            for (auto& v : values) v = cur.get_le<float>("payload");
            stack.channels.emplace_back(id, Raster2D(geo, std::move(values)));
        }
        series.stacks.push_back(std::move(stack));
    }
    series.validate();
    return series;
}

void cube_write(const SceneSeries& series, const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = cube_serialize(series);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

SceneSeries cube_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
    return cube_parse(bytes);
}

}  // namespace smcforge::raster
