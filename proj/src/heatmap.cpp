#include "smcforge/eval/heatmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include "smcforge/errors.hpp"

namespace smcforge::eval {
namespace {

std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

std::uint32_t adler32(const std::uint8_t* data, std::size_t len) {
    std::uint32_t a = 1, b = 0;
    for (std::size_t i = 0; i < len; ++i) {
        a = (a + data[i]) % 65521u;
        b = (b + a) % 65521u;
    }
    return (b << 16) | a;
}

void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               const std::vector<std::uint8_t>& data) {
    put_u32be(out, static_cast<std::uint32_t>(data.size()));
    std::vector<std::uint8_t> body(type, type + 4);
    body.insert(body.end(), data.begin(), data.end());
    out.insert(out.end(), body.begin(), body.end());
    put_u32be(out, crc32(body.data(), body.size()));
}

/// zlib stream with stored (uncompressed) deflate blocks — small, portable,
/// and byte-deterministic, which matters more here than file size.
std::vector<std::uint8_t> zlib_stored(const std::vector<std::uint8_t>& raw) {
    std::vector<std::uint8_t> z;
    z.push_back(0x78);
    z.push_back(0x01);
    std::size_t off = 0;
    do {
        const std::size_t len = std::min<std::size_t>(raw.size() - off, 65535);
        const bool final = off + len == raw.size();
        z.push_back(final ? 0x01 : 0x00);
        z.push_back(static_cast<std::uint8_t>(len & 0xFF));
        z.push_back(static_cast<std::uint8_t>(len >> 8));
        z.push_back(static_cast<std::uint8_t>(~len & 0xFF));
        z.push_back(static_cast<std::uint8_t>((~len >> 8) & 0xFF));
        z.insert(z.end(), raw.begin() + static_cast<std::ptrdiff_t>(off),
                 raw.begin() + static_cast<std::ptrdiff_t>(off + len));
        off += len;
    } while (off < raw.size());
    put_u32be(z, adler32(raw.data(), raw.size()));
    return z;
}

}  // namespace

Rgb heatmap_color(float v, float lo, float hi) {
    if (!(lo < hi)) {
        throw ValidationError("heatmap: need lo < hi, got [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
    }
    if (std::isnan(v)) return {128, 128, 128};
    double t = (static_cast<double>(v) - lo) / (static_cast<double>(hi) - lo);
    t = std::clamp(t, 0.0, 1.0);
    const auto blend = [t](double a, double b) {
        return static_cast<std::uint8_t>(std::floor(a + (b - a) * t));
    };
    return {blend(220, 30), blend(40, 60), blend(30, 255)};
}

std::vector<std::uint8_t> heatmap_png_bytes(const raster::Raster2D& map, float lo, float hi) {
    const std::uint32_t w = map.width();
    const std::uint32_t h = map.height();
    if (w == 0 || h == 0) throw ValidationError("heatmap: empty map");

    // Scanlines, each prefixed with PNG filter type 0 (none).
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(h) * (1 + 3 * static_cast<std::size_t>(w)));
    for (std::uint32_t y = 0; y < h; ++y) {
        raw.push_back(0);
        for (std::uint32_t x = 0; x < w; ++x) {
            const Rgb c = heatmap_color(map.at(x, y), lo, hi);
            raw.push_back(c.r);
            raw.push_back(c.g);
            raw.push_back(c.b);
        }
    }

    std::vector<std::uint8_t> png = {137, 80, 78, 71, 13, 10, 26, 10};
    std::vector<std::uint8_t> ihdr;
    put_u32be(ihdr, w);
    put_u32be(ihdr, h);
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor RGB
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter
    ihdr.push_back(0);  // interlace
    put_chunk(png, "IHDR", ihdr);
    put_chunk(png, "IDAT", zlib_stored(raw));
    put_chunk(png, "IEND", {});
    return png;
}

void render_heatmap(const raster::Raster2D& map, float lo, float hi,
                    const std::filesystem::path& path) {
    const std::vector<std::uint8_t> png = heatmap_png_bytes(map, lo, hi);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("heatmap: cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
    if (!f) throw IoError("heatmap: short write to " + path.string());
}

}  // namespace smcforge::eval
