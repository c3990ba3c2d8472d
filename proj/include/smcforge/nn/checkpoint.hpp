#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "smcforge/nn/tensor.hpp"

namespace smcforge::nn {

/// Named f32 tensors plus free-form metadata, written as one deterministic
/// binary file: "SMCW", u16 version, u32 manifest length, JSON manifest,
/// then the little-endian f32 payload in manifest order.
struct Checkpoint {
    std::map<std::string, Tensor<float>> tensors;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

inline constexpr std::uint16_t kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace smcforge::nn
