#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "smcforge/errors.hpp"
#include "smcforge/raster.hpp"

// SMC1 cube container, little-endian throughout:
//
//   magic "SMC1"      4 bytes
//   version           u16 (= 1)
//   channel_count     u16
//   T, H, W           u32 each
//   cadence_days      u32
//   origin_x          f64
//   origin_y          f64
//   pixel_size        f64
//   timestamps        i64 * T
//   channel names     per channel: len u8 + ASCII bytes
//   payload           f32 * T*C*H*W, T-major, then channel, then row-major plane
//
// Payload floats are stored bit-for-bit, so NaN placement survives a round trip.

namespace smcforge::raster {

class CubeFormatError : public IoError {
public:
    using IoError::IoError;
};
class BadMagicError : public CubeFormatError {
public:
    using CubeFormatError::CubeFormatError;
};
class FormatVersionError : public CubeFormatError {
public:
    using CubeFormatError::CubeFormatError;
};
class TruncatedFileError : public CubeFormatError {
public:
    using CubeFormatError::CubeFormatError;
};

inline constexpr std::uint16_t kCubeFormatVersion = 1;

/// Exact on-disk byte count for a cube with the given dims and channel ids.
std::uint64_t cube_file_size(std::uint64_t t, std::uint64_t h, std::uint64_t w,
                             const std::vector<ChannelId>& channels);

/// Serialize to bytes. Requires a valid series whose stacks all carry the
/// same channel list (the container has a single channel table).
std::vector<std::uint8_t> cube_serialize(const SceneSeries& series);

SceneSeries cube_parse(const std::vector<std::uint8_t>& bytes);

/// Validates, then writes the SMC1 file. Byte-deterministic for equal input;
/// nothing is written when validation fails.
void cube_write(const SceneSeries& series, const std::filesystem::path& path);

SceneSeries cube_read(const std::filesystem::path& path);

}  // namespace smcforge::raster
