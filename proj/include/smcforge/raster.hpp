#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace smcforge::raster {

/// Spatial footprint of a grid: square pixels, trivial affine (origin + size).
struct GridGeo {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pixel_size = 1.0;  // meters per pixel

    [[nodiscard]] bool valid() const {
        return width >= 1 && height >= 1 && pixel_size > 0.0 && std::isfinite(pixel_size);
    }
    bool operator==(const GridGeo&) const = default;
};

/// One f32 plane on a grid, row-major. Nodata is NaN.
class Raster2D {
public:
    Raster2D() = default;
    Raster2D(GridGeo geo, std::vector<float> values);

    /// Plane filled with a constant (defaults to NaN).
    static Raster2D filled(GridGeo geo, float value = std::numeric_limits<float>::quiet_NaN());

    [[nodiscard]] const GridGeo& geo() const { return geo_; }
    [[nodiscard]] std::uint32_t width() const { return geo_.width; }
    [[nodiscard]] std::uint32_t height() const { return geo_.height; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }

    [[nodiscard]] float at(std::uint32_t x, std::uint32_t y) const {
        return values_[static_cast<std::size_t>(y) * geo_.width + x];
    }
    void set(std::uint32_t x, std::uint32_t y, float v) {
        values_[static_cast<std::size_t>(y) * geo_.width + x] = v;
    }

    [[nodiscard]] const std::vector<float>& values() const { return values_; }
    [[nodiscard]] std::vector<float>& values() { return values_; }

    /// Mean over non-NaN cells; nullopt when every cell is NaN.
    [[nodiscard]] std::optional<float> mean_valid() const;

private:
    GridGeo geo_{};
    std::vector<float> values_;
};

/// Channel identities. The first 14 are the fixed model feature order.
enum class ChannelId : std::uint8_t {
    VV_DB = 0,
    VH_DB,
    HH_DB,
    HV_DB,
    INC_DEG,
    RED,
    GREEN,
    BLUE,
    NIR,
    NDVI,
    DOY_SIN,
    DOY_COS,
    RAIN_MM,
    SMC_LAG,
    SMC_MAP,  // target maps, not a model input
};

inline constexpr std::size_t kFeatureChannelCount = 14;
inline constexpr std::size_t kChannelCount = 15;

inline constexpr std::array<ChannelId, kFeatureChannelCount> kFeatureChannels = {
    ChannelId::VV_DB, ChannelId::VH_DB,   ChannelId::HH_DB,   ChannelId::HV_DB,
    ChannelId::INC_DEG, ChannelId::RED,   ChannelId::GREEN,   ChannelId::BLUE,
    ChannelId::NIR,   ChannelId::NDVI,    ChannelId::DOY_SIN, ChannelId::DOY_COS,
    ChannelId::RAIN_MM, ChannelId::SMC_LAG,
};

std::string_view channel_name(ChannelId id);

/// Reverse lookup; throws ValidationError for unknown names.
ChannelId channel_from_name(std::string_view name);

/// All channel planes acquired (or derived) at one date.
struct RasterStack {
    std::int64_t timestamp = 0;  // days since 1970-01-01
    std::vector<std::pair<ChannelId, Raster2D>> channels;

    [[nodiscard]] const Raster2D* find(ChannelId id) const;

    /// All geos identical, no duplicate channel; throws ValidationError.
    void validate() const;
};

/// Time-ascending stacks on a shared grid; the training cube.
struct SceneSeries {
    std::vector<RasterStack> stacks;
    std::uint32_t cadence_days = 1;

    /// Strictly increasing timestamps, shared geo, per-stack validity.
    void validate() const;

    [[nodiscard]] const GridGeo& geo() const { return stacks.front().channels.front().second.geo(); }
};

/// k odd. Returns the k-by-k window centered at (cx, cy); cells that fall
/// outside the source plane are NaN. The patch geo keeps the source pixel
/// size with the origin shifted to the patch corner.
Raster2D extract_patch(const Raster2D& r, std::uint32_t cx, std::uint32_t cy, std::uint32_t k);

}  // namespace smcforge::raster
