#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "json.hpp"
#include "socfno/augment.hpp"
#include "socfno/checkpoint.hpp"
#include "socfno/data.hpp"
#include "socfno/losses.hpp"
#include "socfno/model.hpp"
#include "socfno/optim.hpp"

namespace socfno {

struct TrainConfig {
    ModelConfig model = ModelConfig::fno_densenet();
    LossConfig loss;
    std::size_t epochs = 400;
    std::size_t batch_size = 32;
    double lr_max = 1e-2;
    double lr_min = 1e-4;
    bool augment = true;
    AugmentConfig augmentation;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;  // running mean over the epoch's (augmented) samples
    double train_mae = 0.0;
    double val_loss = 0.0;
    double val_mae = 0.0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
    double seconds = 0.0;
};

nlohmann::json to_json(const EpochRecord& r);
nlohmann::json to_json(const TrainReport& r);

struct TrainResult {
    ModelCheckpoint best;  // minimum validation loss
    TrainReport report;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains on the dataset's training split, selecting the epoch with the lowest
/// validation loss. Throws NumericalFailure on a non-finite loss.
TrainResult train(const Dataset& dataset, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// SSIM settings matching a dataset or checkpoint dynamic range.
SsimConfig ssim_config_for(double target_max);

/// Prediction of a raw (unstandardized) [C,H,W] raster.
Tensor predict(const ModelCheckpoint& ckpt, const Tensor& raw_input);

}  // namespace socfno
