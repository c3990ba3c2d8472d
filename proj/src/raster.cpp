#include "smcforge/raster.hpp"

#include <unordered_set>

#include "smcforge/errors.hpp"

namespace smcforge::raster {

Raster2D::Raster2D(GridGeo geo, std::vector<float> values)
    : geo_(geo), values_(std::move(values)) {
    if (!geo_.valid()) {
        throw ValidationError("Raster2D: invalid geo (width/height >= 1, pixel_size > 0)");
    }
    const std::size_t expect = static_cast<std::size_t>(geo_.width) * geo_.height;
    if (values_.size() != expect) {
        throw ValidationError("Raster2D: value count " + std::to_string(values_.size()) +
                              " does not match " + std::to_string(geo_.width) + "x" +
                              std::to_string(geo_.height));
    }
    for (float v : values_) {
        if (!std::isnan(v) && !std::isfinite(v)) {
            throw ValidationError("Raster2D: non-finite value that is not NaN nodata");
        }
    }
}

Raster2D Raster2D::filled(GridGeo geo, float value) {
    return Raster2D(geo, std::vector<float>(static_cast<std::size_t>(geo.width) * geo.height, value));
}

std::optional<float> Raster2D::mean_valid() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (float v : values_) {
        if (!std::isnan(v)) {
            sum += v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return static_cast<float>(sum / static_cast<double>(n));
}

namespace {
constexpr std::array<std::string_view, kChannelCount> kChannelNames = {
    "VV_DB", "VH_DB", "HH_DB", "HV_DB", "INC_DEG", "RED", "GREEN", "BLUE",
    "NIR",   "NDVI",  "DOY_SIN", "DOY_COS", "RAIN_MM", "SMC_LAG", "SMC_MAP",
};
}  // namespace

std::string_view channel_name(ChannelId id) {
    return kChannelNames[static_cast<std::size_t>(id)];
}

ChannelId channel_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kChannelNames.size(); ++i) {
        if (kChannelNames[i] == name) return static_cast<ChannelId>(i);
    }
    throw ValidationError("unknown channel name '" + std::string(name) + "'");
}

const Raster2D* RasterStack::find(ChannelId id) const {
    for (const auto& [cid, plane] : channels) {
        if (cid == id) return &plane;
    }
    return nullptr;
}

void RasterStack::validate() const {
    if (channels.empty()) {
        throw ValidationError("RasterStack: no channels");
    }
    const GridGeo& geo = channels.front().second.geo();
    std::unordered_set<std::uint8_t> seen;
    for (const auto& [cid, plane] : channels) {
        if (!(plane.geo() == geo)) {
            throw ValidationError("RasterStack: channel geo mismatch on " +
                                  std::string(channel_name(cid)));
        }
        if (!seen.insert(static_cast<std::uint8_t>(cid)).second) {
            throw ValidationError("RasterStack: duplicate channel " +
                                  std::string(channel_name(cid)));
        }
    }
}

void SceneSeries::validate() const {
    if (stacks.empty()) {
        throw ValidationError("SceneSeries: no stacks");
    }
    stacks.front().validate();
    const GridGeo& geo = stacks.front().channels.front().second.geo();
    std::int64_t prev_ts = stacks.front().timestamp;
    for (std::size_t i = 1; i < stacks.size(); ++i) {
        stacks[i].validate();
        if (stacks[i].timestamp <= prev_ts) {
            throw ValidationError("SceneSeries: timestamps not strictly increasing at index " +
                                  std::to_string(i));
        }
        prev_ts = stacks[i].timestamp;
        if (!(stacks[i].channels.front().second.geo() == geo)) {
            throw ValidationError("SceneSeries: stack geo mismatch at index " + std::to_string(i));
        }
    }
}

Raster2D extract_patch(const Raster2D& r, std::uint32_t cx, std::uint32_t cy, std::uint32_t k) {
    if (k < 1 || k % 2 == 0) {
        throw ValidationError("extract_patch: k must be odd and >= 1, got " + std::to_string(k));
    }
    const std::int64_t half = k / 2;
    GridGeo geo;
    geo.width = k;
    geo.height = k;
    geo.pixel_size = r.geo().pixel_size;
    geo.origin_x = r.geo().origin_x + (static_cast<std::int64_t>(cx) - half) * r.geo().pixel_size;
    geo.origin_y = r.geo().origin_y + (static_cast<std::int64_t>(cy) - half) * r.geo().pixel_size;

    Raster2D patch = Raster2D::filled(geo);
    for (std::int64_t dy = -half; dy <= half; ++dy) {
        const std::int64_t sy = static_cast<std::int64_t>(cy) + dy;
        if (sy < 0 || sy >= static_cast<std::int64_t>(r.height())) continue;
        for (std::int64_t dx = -half; dx <= half; ++dx) {
            const std::int64_t sx = static_cast<std::int64_t>(cx) + dx;
            if (sx < 0 || sx >= static_cast<std::int64_t>(r.width())) continue;
            patch.set(static_cast<std::uint32_t>(dx + half), static_cast<std::uint32_t>(dy + half),
                      r.at(static_cast<std::uint32_t>(sx), static_cast<std::uint32_t>(sy)));
        }
    }
    return patch;
}

}  // namespace smcforge::raster
