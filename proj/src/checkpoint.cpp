#include "socfno/checkpoint.hpp"

#include <bit>

namespace socfno {

namespace {

constexpr int kCheckpointVersion = 1;

std::string blob_path(const std::string& path) { return path + ".bin"; }

nlohmann::json read_manifest(const std::string& path) {
    const std::string text = read_file(manifest_path(path));
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("checkpoint manifest '" + manifest_path(path) + "' is not valid JSON: " + e.what(), e.byte);
    }
}

void append_f64le(std::string& out, double value) {
    const auto bits = std::bit_cast<std::uint64_t>(value);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

double read_f64le(const unsigned char* bytes) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelCheckpoint& ckpt, StorageType storage) {
    const bool f32 = storage == StorageType::Float32;
    std::string blob;
    nlohmann::json params = nlohmann::json::array();
    for (const auto& [name, value] : ckpt.model.parameters()) {
        params.push_back({{"name", name}, {"shape", value->shape()}, {"offset", blob.size()}, {"count", value->size()}});
        for (double v : value->values()) {
            if (f32)
                append_f32le(blob, v);
            else
                append_f64le(blob, v);
        }
    }
    nlohmann::json manifest = {{"kind", "model"},
                               {"version", kCheckpointVersion},
                               {"config", to_json(ckpt.model.config())},
                               {"dtype", f32 ? "float32-le" : "float64-le"},
                               {"normalization", to_json(ckpt.normalization)},
                               {"target_max", ckpt.target_max},
                               {"loss", ckpt.loss},
                               {"seed", ckpt.seed},
                               {"blob_bytes", blob.size()},
                               {"parameters", std::move(params)}};
    write_file(blob_path(path), blob);
    write_file(manifest_path(path), manifest.dump(2) + "\n");
}

ModelCheckpoint load_checkpoint(const std::string& path) {
    const nlohmann::json j = read_manifest(path);
    try {
        if (j.at("kind").get<std::string>() != "model")
            throw InvalidArgument("'" + path + "' is not a network checkpoint");
        if (j.at("version").get<int>() != kCheckpointVersion)
            throw InvalidArgument("unsupported checkpoint version");
        const std::string dtype = j.at("dtype").get<std::string>();
        if (dtype != "float32-le" && dtype != "float64-le")
            throw InvalidArgument("unsupported checkpoint dtype '" + dtype + "'");
        const std::size_t width = dtype == "float32-le" ? 4 : 8;

        ModelCheckpoint ckpt{Model(model_config_from_json(j.at("config"))), {}, 1.0, {}, 0};
        ckpt.normalization = band_stats_from_json(j.at("normalization"));
        ckpt.target_max = j.at("target_max").get<double>();
        ckpt.loss = j.value("loss", std::string{});
        ckpt.seed = j.value("seed", std::uint64_t{0});

        const std::string blob = read_file(blob_path(path));
        const auto expected = j.at("blob_bytes").get<std::size_t>();
        if (blob.size() != expected)
            throw FormatError("checkpoint blob '" + blob_path(path) + "' length mismatch: expected " +
                                  std::to_string(expected) + " bytes, found " + std::to_string(blob.size()),
                              std::min(blob.size(), expected));

        auto refs = ckpt.model.parameters();
        const auto& entries = j.at("parameters");
        if (entries.size() != refs.size()) throw InvalidArgument("checkpoint parameter list does not match the config");
        const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
        for (std::size_t i = 0; i < refs.size(); ++i) {
            const auto& e = entries[i];
            if (e.at("name").get<std::string>() != refs[i].name || e.at("shape").get<Shape>() != refs[i].value->shape())
                throw InvalidArgument("checkpoint parameter '" + e.at("name").get<std::string>() +
                                      "' does not match the model registry entry '" + refs[i].name + "'");
            const auto offset = e.at("offset").get<std::size_t>();
            auto& values = refs[i].value->values();
            if (offset + values.size() * width > blob.size())
                throw FormatError("checkpoint parameter '" + refs[i].name + "' runs past the blob", offset);
            for (std::size_t k = 0; k < values.size(); ++k)
                values[k] = width == 4 ? static_cast<double>(read_f32le(bytes + offset + 4 * k))
                                       : read_f64le(bytes + offset + 8 * k);
        }
        return ckpt;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed checkpoint manifest: ") + e.what());
    }
}

void save_forest(const std::string& path, const Forest& forest) {
    write_file(manifest_path(path), to_json(forest).dump(1) + "\n");
}

Forest load_forest(const std::string& path) { return forest_from_json(read_manifest(path)); }

std::string checkpoint_kind(const std::string& path) {
    const nlohmann::json j = read_manifest(path);
    const std::string kind = j.value("kind", std::string{});
    if (kind != "model" && kind != "forest") throw InvalidArgument("'" + path + "' is not a checkpoint");
    return kind;
}

}  // namespace socfno
