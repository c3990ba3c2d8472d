#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "smcforge/raster.hpp"

namespace smcforge::eval {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

/// Dry-to-wet ramp: lo maps to (220,40,30), hi to (30,60,255), values are
/// clipped into [lo, hi] first and blended with truncation (midpoint lands on
/// (125,50,142)). NaN renders as neutral gray (128,128,128).
Rgb heatmap_color(float v, float lo, float hi);

/// The full PNG byte stream for a map (8-bit RGB, no ancillary chunks, stored
/// deflate blocks) — byte-identical for identical inputs.
std::vector<std::uint8_t> heatmap_png_bytes(const raster::Raster2D& map, float lo, float hi);

/// Renders the map to a PNG file at `path`.
void render_heatmap(const raster::Raster2D& map, float lo, float hi,
                    const std::filesystem::path& path);

}  // namespace smcforge::eval
