#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "socfno/checkpoint.hpp"
#include "socfno/data.hpp"
#include "socfno/forest.hpp"
#include "socfno/losses.hpp"
#include "socfno/train.hpp"

namespace socfno {

inline const std::vector<std::string> kModelNames = {"forest", "fno", "fno-densenet"};
inline const std::vector<std::string> kLossNames = {"mae", "dssim", "mae+dssim"};

struct ExperimentConfig {
    std::string model = "fno-densenet";
    std::string loss = "mae+dssim";
    std::size_t epochs = 400;
    std::size_t batch_size = 32;
    std::size_t repeats = 5;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;  // overrides seed + r when non-empty
    std::string dataset;
    std::string out_dir = "out";
    double lr_max = 1e-2;
    double lr_min = 1e-4;
    bool augment = true;
    // Architecture overrides; zero keeps the preset value.
    std::size_t hidden_channels = 0;
    std::size_t n_fourier_layers = 0;
    std::size_t modes = 0;
    bool full_grid = false;  // per-mode kernels over the whole half spectrum (fno only)
    std::string activation = "relu";
    std::string norm = "instance";
    std::string dtype = "float32";
    ForestConfig forest;
    std::vector<std::string> models = kModelNames;  // matrix rows
    std::vector<std::string> losses = kLossNames;   // matrix columns
    bool verbose = false;

    void validate() const;
    std::vector<std::uint64_t> repeat_seeds() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Fields missing from j keep their defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

/// Network architecture selected by an experiment config for a dataset's band count and grid.
ModelConfig model_config_for(const ExperimentConfig& cfg, std::size_t in_channels, std::size_t height,
                             std::size_t width);
TrainConfig train_config_for(const ExperimentConfig& cfg, const Dataset& dataset, std::uint64_t seed);

/// One trained repeat of a model/loss setting.
struct RepeatOutcome {
    std::uint64_t seed = 0;
    std::string checkpoint;  // path prefix
    std::optional<TrainReport> report;  // absent for forests
};

/// Trains cfg.repeats models on dataset and writes checkpoints, train reports
/// and the effective config into cfg.out_dir.
std::vector<RepeatOutcome> cmd_train(const ExperimentConfig& cfg, const Dataset& dataset);

/// Predictions of a checkpoint (network or forest) for the given samples.
std::vector<Tensor> predict_checkpoint(const std::string& checkpoint, const Dataset& dataset,
                                       const std::vector<std::size_t>& indices);

/// Repeat-averaged evaluation: per image each metric is averaged over the
/// checkpoints, then summarized as mean and std across images.
struct EvalOutcome {
    EvalReport aggregate;
    std::vector<EvalReport> repeats;
    std::vector<std::string> ids;
};

/// SSIM dynamic range is the dataset's training target maximum.
EvalOutcome cmd_eval(const std::vector<std::string>& checkpoints, const Dataset& dataset, Split split,
                     bool self_oracle = false, const std::string& predictions_out = {});

nlohmann::json to_json(const EvalOutcome& outcome);

struct PredictOutcome {
    std::string prediction_pgm;
    std::string truth_pgm;
    std::string sidecar;
};

/// Writes <out>.pred.pgm, <out>.truth.pgm with one shared linear scale and
/// the scale in <out>.json.
PredictOutcome cmd_predict(const std::string& checkpoint, const Dataset& dataset, const std::string& id,
                           const std::string& out);

/// Table-style grid: cells[model][loss]; a forest only has the MAE cell.
struct MatrixOutcome {
    std::map<std::string, std::map<std::string, std::optional<EvalOutcome>>> cells;
};

MatrixOutcome cmd_matrix(const ExperimentConfig& cfg, const Dataset& dataset);
nlohmann::json to_json(const MatrixOutcome& outcome);

/// Writes a JSON document with a trailing newline.
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace socfno
