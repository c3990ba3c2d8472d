#include "smcforge/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace smcforge::nn {

namespace {

constexpr char kMagic[4] = {'S', 'M', 'C', 'W'};

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
    }
    out.insert(out.end(), raw, raw + sizeof(T));
}

template <class T>
T get_le(const std::vector<std::uint8_t>& bytes, std::size_t& pos, const char* what) {
    if (pos + sizeof(T) > bytes.size()) {
        throw IoError("checkpoint truncated in " + std::string(what));
    }
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
    }
    pos += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    nlohmann::ordered_json manifest;
    manifest["meta"] = ckpt.meta;
    manifest["tensors"] = nlohmann::ordered_json::array();
    std::size_t offset = 0;
    for (const auto& [name, tensor] : ckpt.tensors) {
        nlohmann::ordered_json entry;
        entry["name"] = name;
        entry["shape"] = tensor.shape;
        entry["offset"] = offset;
        entry["count"] = tensor.size();
        manifest["tensors"].push_back(std::move(entry));
        offset += tensor.size();
    }
    const std::string json = manifest.dump();

    std::vector<std::uint8_t> bytes;
    bytes.reserve(4 + 2 + 4 + json.size() + offset * 4);
    bytes.insert(bytes.end(), kMagic, kMagic + 4);
    put_le<std::uint16_t>(bytes, kCheckpointVersion);
    put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(json.size()));
    bytes.insert(bytes.end(), json.begin(), json.end());
    for (const auto& [name, tensor] : ckpt.tensors) {
        for (float v : tensor.data) put_le<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(v));
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw IoError("'" + path.string() + "' is not a checkpoint (bad magic)");
    }
    pos = 4;
    const auto version = get_le<std::uint16_t>(bytes, pos, "version");
    if (version != kCheckpointVersion) {
        throw IoError("checkpoint version " + std::to_string(version) + " unsupported");
    }
    const auto json_len = get_le<std::uint32_t>(bytes, pos, "manifest length");
    if (pos + json_len > bytes.size()) throw IoError("checkpoint truncated in manifest");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + json_len));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("checkpoint manifest unparseable: " + std::string(e.what()));
    }
    pos += json_len;

    Checkpoint ckpt;
    ckpt.meta = manifest.value("meta", nlohmann::json::object());
    const std::size_t blob_base = pos;
    for (const auto& entry : manifest.at("tensors")) {
        const std::string name = entry.at("name").get<std::string>();
        Tensor<float> tensor;
        tensor.shape = entry.at("shape").get<std::vector<std::size_t>>();
        const auto count = entry.at("count").get<std::size_t>();
        if (count != Tensor<float>::numel(tensor.shape)) {
            throw IoError("checkpoint tensor '" + name + "' count does not match its shape");
        }
        const auto offset = entry.at("offset").get<std::size_t>();
        std::size_t cursor = blob_base + offset * 4;
        tensor.data.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            tensor.data[i] =
                std::bit_cast<float>(get_le<std::uint32_t>(bytes, cursor, name.c_str()));
        }
        ckpt.tensors.emplace(name, std::move(tensor));
    }
    return ckpt;
}

}  // namespace smcforge::nn
