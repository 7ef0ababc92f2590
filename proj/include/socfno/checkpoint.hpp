#pragma once

#include <string>

#include "json.hpp"
#include "socfno/data.hpp"
#include "socfno/forest.hpp"
#include "socfno/model.hpp"

namespace socfno {

enum class StorageType { Float32, Float64 };

/// A trained network together with the data statistics it was trained on.
struct ModelCheckpoint {
    Model model{ModelConfig{}};
    BandStats normalization;
    double target_max = 1.0;  // SSIM dynamic range
    std::string loss;
    std::uint64_t seed = 0;
};

// Network checkpoint: <path>.json manifest (config, statistics, parameter
// names, shapes and offsets) plus <path>.bin, the little-endian parameter
// blob concatenated in manifest order.
void save_checkpoint(const std::string& path, const ModelCheckpoint& ckpt,
                     StorageType storage = StorageType::Float32);
ModelCheckpoint load_checkpoint(const std::string& path);

/// Forest checkpoint: <path>.json only.
void save_forest(const std::string& path, const Forest& forest);
Forest load_forest(const std::string& path);

/// "model" or "forest", read from <path>.json.
std::string checkpoint_kind(const std::string& path);

}  // namespace socfno
