#include "socfno/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "socfno/pgm.hpp"

namespace socfno {

namespace fs = std::filesystem;

namespace {

bool env_verbose() {
    const char* v = std::getenv("SOCFNO_VERBOSE");
    return v != nullptr && *v != '\0' && std::string(v) != "0";
}

void require_member(const std::string& value, const std::vector<std::string>& allowed, const char* what) {
    if (std::find(allowed.begin(), allowed.end(), value) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
        throw InvalidArgument(std::string("unknown ") + what + " '" + value + "' (expected " + list + ")");
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    require_member(model, kModelNames, "model");
    require_member(loss, kLossNames, "loss");
    for (const auto& m : models) require_member(m, kModelNames, "model");
    for (const auto& l : losses) require_member(l, kLossNames, "loss");
    if (epochs < 1) throw InvalidArgument("epochs must be at least 1");
    if (batch_size < 1) throw InvalidArgument("batch size must be at least 1");
    if (repeats < 1) throw InvalidArgument("repeats must be at least 1");
    if (!seeds.empty() && seeds.size() < repeats)
        throw InvalidArgument("seed list has " + std::to_string(seeds.size()) + " entries for " +
                              std::to_string(repeats) + " repeats");
    if (dtype != "float32" && dtype != "float64") throw InvalidArgument("dtype must be float32 or float64");
    parse_activation(activation);
    parse_norm(norm);
    forest.validate();
}

std::vector<std::uint64_t> ExperimentConfig::repeat_seeds() const {
    std::vector<std::uint64_t> out;
    for (std::size_t r = 0; r < repeats; ++r) out.push_back(seeds.empty() ? seed + r : seeds[r]);
    return out;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
    return {{"model", cfg.model},
            {"loss", cfg.loss},
            {"epochs", cfg.epochs},
            {"batch_size", cfg.batch_size},
            {"repeats", cfg.repeats},
            {"seed", cfg.seed},
            {"seeds", cfg.seeds},
            {"dataset", cfg.dataset},
            {"out_dir", cfg.out_dir},
            {"lr_max", cfg.lr_max},
            {"lr_min", cfg.lr_min},
            {"augment", cfg.augment},
            {"hidden_channels", cfg.hidden_channels},
            {"n_fourier_layers", cfg.n_fourier_layers},
            {"modes", cfg.modes},
            {"full_grid", cfg.full_grid},
            {"activation", cfg.activation},
            {"norm", cfg.norm},
            {"dtype", cfg.dtype},
            {"forest", to_json(cfg.forest)},
            {"models", cfg.models},
            {"losses", cfg.losses},
            {"verbose", cfg.verbose}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig base) {
    ExperimentConfig c = std::move(base);
    try {
        c.model = j.value("model", c.model);
        c.loss = j.value("loss", c.loss);
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.repeats = j.value("repeats", c.repeats);
        c.seed = j.value("seed", c.seed);
        c.seeds = j.value("seeds", c.seeds);
        c.dataset = j.value("dataset", c.dataset);
        c.out_dir = j.value("out_dir", c.out_dir);
        c.lr_max = j.value("lr_max", c.lr_max);
        c.lr_min = j.value("lr_min", c.lr_min);
        c.augment = j.value("augment", c.augment);
        c.hidden_channels = j.value("hidden_channels", c.hidden_channels);
        c.n_fourier_layers = j.value("n_fourier_layers", c.n_fourier_layers);
        c.modes = j.value("modes", c.modes);
        c.full_grid = j.value("full_grid", c.full_grid);
        c.activation = j.value("activation", c.activation);
        c.norm = j.value("norm", c.norm);
        c.dtype = j.value("dtype", c.dtype);
        if (j.contains("forest")) {
            nlohmann::json f = to_json(c.forest);
            f.update(j.at("forest"));
            c.forest = forest_config_from_json(f);
        }
        c.models = j.value("models", c.models);
        c.losses = j.value("losses", c.losses);
        c.verbose = j.value("verbose", c.verbose);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed experiment config: ") + e.what());
    }
    return c;
}

ModelConfig model_config_for(const ExperimentConfig& cfg, std::size_t in_channels, std::size_t height,
                             std::size_t width) {
    if (cfg.model == "forest") throw InvalidArgument("the forest model has no network architecture");
    ModelConfig m = cfg.model == "fno" ? ModelConfig::fno() : ModelConfig::fno_densenet();
    m.in_channels = in_channels;
    if (cfg.hidden_channels) m.hidden_channels = cfg.hidden_channels;
    if (cfg.n_fourier_layers) m.n_fourier_layers = cfg.n_fourier_layers;
    if (cfg.modes) m.modes = cfg.modes;
    if (cfg.full_grid) {
        if (cfg.model != "fno") throw InvalidArgument("full-grid kernels are only available for the fno model");
        m.full_grid_height = height;
        m.full_grid_width = width;
    }
    m.activation = parse_activation(cfg.activation);
    m.norm = parse_norm(cfg.norm);
    m.validate();
    return m;
}

TrainConfig train_config_for(const ExperimentConfig& cfg, const Dataset& dataset, std::uint64_t seed) {
    TrainConfig t;
    t.model = model_config_for(cfg, dataset.manifest.channels, dataset.manifest.height, dataset.manifest.width);
    t.loss = loss_config_for(cfg.loss);
    t.epochs = cfg.epochs;
    t.batch_size = cfg.batch_size;
    t.lr_max = cfg.lr_max;
    t.lr_min = cfg.lr_min;
    t.augment = cfg.augment;
    t.seed = seed;
    return t;
}

void write_json(const std::string& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

std::vector<RepeatOutcome> cmd_train(const ExperimentConfig& cfg, const Dataset& dataset) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    write_json((fs::path(cfg.out_dir) / "config.json").string(), to_json(cfg));
    const bool verbose = cfg.verbose || env_verbose();

    std::vector<RepeatOutcome> out;
    const std::string tag = cfg.model == "forest" ? "forest" : cfg.model + "_" + cfg.loss;
    for (std::uint64_t seed : cfg.repeat_seeds()) {
        RepeatOutcome r;
        r.seed = seed;
        r.checkpoint = (fs::path(cfg.out_dir) / (tag + "_s" + std::to_string(seed))).string();
        if (cfg.model == "forest") {
            if (cfg.loss != "mae") throw InvalidArgument("the pixel-based forest only supports the mae loss");
            std::vector<Tensor> inputs, targets;
            for (std::size_t i : dataset.indices(Split::Train)) {
                inputs.push_back(dataset.samples[i].input);
                targets.push_back(dataset.samples[i].target);
            }
            ForestConfig fc = cfg.forest;
            fc.seed = seed;
            save_forest(r.checkpoint, fit_forest(pixels_from_rasters(inputs, targets), fc));
        } else {
            const TrainConfig tc = train_config_for(cfg, dataset, seed);
            EpochCallback log;
            if (verbose)
                log = [&](const EpochRecord& e) {
                    std::fprintf(stderr, "[%s seed %llu] epoch %zu lr %.3g train %.5f (mae %.4f) val %.5f (mae %.4f)\n",
                                 tag.c_str(), static_cast<unsigned long long>(seed), e.epoch + 1, e.lr, e.train_loss,
                                 e.train_mae, e.val_loss, e.val_mae);
                };
            TrainResult result = train(dataset, tc, log);
            const StorageType storage = cfg.dtype == "float64" ? StorageType::Float64 : StorageType::Float32;
            if (storage == StorageType::Float32) result.best.model.round_to_float32();
            save_checkpoint(r.checkpoint, result.best, storage);
            write_json(r.checkpoint + ".train.json", to_json(result.report));
            r.report = std::move(result.report);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Tensor> predict_checkpoint(const std::string& checkpoint, const Dataset& dataset,
                                       const std::vector<std::size_t>& indices) {
    std::vector<Tensor> preds;
    if (checkpoint_kind(checkpoint) == "forest") {
        const Forest forest = load_forest(checkpoint);
        for (std::size_t i : indices) preds.push_back(predict_forest(forest, dataset.samples[i].input));
    } else {
        const ModelCheckpoint ckpt = load_checkpoint(checkpoint);
        for (std::size_t i : indices) preds.push_back(predict(ckpt, dataset.samples[i].input));
    }
    return preds;
}

EvalOutcome cmd_eval(const std::vector<std::string>& checkpoints, const Dataset& dataset, Split split,
                     bool self_oracle, const std::string& predictions_out) {
    const auto indices = dataset.indices(split);
    if (indices.empty()) throw InvalidArgument("evaluation split '" + to_string(split) + "' is empty");
    if (checkpoints.empty() && !self_oracle) throw InvalidArgument("eval: no checkpoints given");
    const SsimConfig ssim_cfg = ssim_config_for(dataset.manifest.target_max);

    std::vector<Tensor> targets;
    EvalOutcome outcome;
    for (std::size_t i : indices) {
        targets.push_back(dataset.samples[i].target);
        outcome.ids.push_back(dataset.samples[i].id);
    }

    nlohmann::json dump = nlohmann::json::array();
    const std::size_t runs = self_oracle ? 1 : checkpoints.size();
    for (std::size_t r = 0; r < runs; ++r) {
        const std::vector<Tensor> preds = self_oracle ? targets : predict_checkpoint(checkpoints[r], dataset, indices);
        outcome.repeats.push_back(evaluate(preds, targets, ssim_cfg));
        if (!predictions_out.empty()) {
            nlohmann::json images = nlohmann::json::array();
            for (std::size_t k = 0; k < preds.size(); ++k)
                images.push_back({{"id", outcome.ids[k]}, {"shape", preds[k].shape()}, {"values", preds[k].values()}});
            dump.push_back({{"checkpoint", self_oracle ? std::string("self-oracle") : checkpoints[r]},
                            {"images", std::move(images)}});
        }
    }
    if (!predictions_out.empty())
        write_file(predictions_out, nlohmann::json{{"ssim_dynamic_range", ssim_cfg.dynamic_range},
                                                   {"split", to_string(split)},
                                                   {"runs", std::move(dump)}}
                                        .dump() +
                                        "\n");

    auto pooled = [&](MetricSummary EvalReport::*metric) {
        std::vector<double> per_image(indices.size(), 0.0);
        for (std::size_t k = 0; k < indices.size(); ++k) {
            double mean = 0.0;
            std::size_t n = 0;
            for (const auto& rep : outcome.repeats) mean += ((rep.*metric).per_image[k] - mean) / static_cast<double>(++n);
            per_image[k] = mean;
        }
        return summarize(std::move(per_image));
    };
    outcome.aggregate = {pooled(&EvalReport::rmse), pooled(&EvalReport::mape), pooled(&EvalReport::ssim)};
    return outcome;
}

nlohmann::json to_json(const EvalOutcome& outcome) {
    nlohmann::json repeats = nlohmann::json::array();
    for (const auto& r : outcome.repeats) repeats.push_back(to_json(r));
    nlohmann::json j = to_json(outcome.aggregate);
    j["ids"] = outcome.ids;
    j["repeats"] = std::move(repeats);
    return j;
}

PredictOutcome cmd_predict(const std::string& checkpoint, const Dataset& dataset, const std::string& id,
                           const std::string& out) {
    const std::size_t idx = dataset.find(id);
    const Tensor pred = predict_checkpoint(checkpoint, dataset, {idx}).front();
    const Tensor& truth = dataset.samples[idx].target;

    auto extent = [](const Tensor& t) {
        const auto [lo, hi] = std::minmax_element(t.values().begin(), t.values().end());
        return std::pair{*lo, *hi};
    };
    const auto [pred_lo, pred_hi] = extent(pred);
    const auto [truth_lo, truth_hi] = extent(truth);
    const double lo = std::min(pred_lo, truth_lo), hi = std::max(pred_hi, truth_hi);

    const fs::path parent = fs::path(out).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    PredictOutcome result{out + ".pred.pgm", out + ".truth.pgm", out + ".json"};
    write_pgm(result.prediction_pgm, quantize(pred, lo, hi));
    write_pgm(result.truth_pgm, quantize(truth, lo, hi));
    write_json(result.sidecar, {{"id", id},
                                {"width", pred.dim(2)},
                                {"height", pred.dim(1)},
                                {"min", lo},
                                {"max", hi},
                                {"unit", dataset.manifest.target_unit},
                                {"scaling", "value = min + (max - min) * pixel / 255"},
                                {"prediction", {{"file", fs::path(result.prediction_pgm).filename().string()},
                                                {"min", pred_lo},
                                                {"max", pred_hi}}},
                                {"ground_truth", {{"file", fs::path(result.truth_pgm).filename().string()},
                                                  {"min", truth_lo},
                                                  {"max", truth_hi}}}});
    return result;
}

MatrixOutcome cmd_matrix(const ExperimentConfig& cfg, const Dataset& dataset) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    write_json((fs::path(cfg.out_dir) / "config.json").string(), to_json(cfg));
    MatrixOutcome outcome;
    for (const auto& model : cfg.models) {
        for (const auto& loss : cfg.losses) {
            auto& cell = outcome.cells[model][loss];
            if (model == "forest" && loss != "mae") continue;  // DSSIM does not apply to a pixel model
            ExperimentConfig run = cfg;
            run.model = model;
            run.loss = loss;
            run.out_dir = (fs::path(cfg.out_dir) / (model == "forest" ? model : model + "_" + loss)).string();
            std::vector<std::string> checkpoints;
            for (const auto& r : cmd_train(run, dataset)) checkpoints.push_back(r.checkpoint);
            cell = cmd_eval(checkpoints, dataset, Split::Test);
            write_json((fs::path(run.out_dir) / "eval.json").string(), to_json(*cell));
        }
    }
    write_json((fs::path(cfg.out_dir) / "matrix_report.json").string(), to_json(outcome));
    return outcome;
}

nlohmann::json to_json(const MatrixOutcome& outcome) {
    nlohmann::json models = nlohmann::json::object();
    for (const auto& [model, row] : outcome.cells) {
        nlohmann::json cells = nlohmann::json::object();
        for (const auto& [loss, cell] : row) {
            if (!cell) {
                cells[loss] = {{"rmse", nullptr}, {"mape", nullptr}, {"ssim", nullptr}};
                continue;
            }
            const auto& a = cell->aggregate;
            cells[loss] = {{"rmse", {{"mean", a.rmse.mean}, {"std", a.rmse.std}}},
                           {"mape", {{"mean", a.mape.mean}, {"std", a.mape.std}}},
                           {"ssim", {{"mean", a.ssim.mean}, {"std", a.ssim.std}}}};
        }
        models[model] = std::move(cells);
    }
    return {{"split", "test"}, {"models", std::move(models)}};
}

}  // namespace socfno
