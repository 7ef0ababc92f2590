#include "socfno/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace socfno {

void TrainConfig::validate() const {
    model.validate();
    loss.validate();
    if (epochs < 1) throw InvalidArgument("train: epochs must be at least 1");
    if (batch_size < 1) throw InvalidArgument("train: batch size must be at least 1");
    if (!(lr_max >= lr_min) || !(lr_min > 0.0)) throw InvalidArgument("train: need lr_max >= lr_min > 0");
}

nlohmann::json to_json(const EpochRecord& r) {
    return {{"epoch", r.epoch},         {"lr", r.lr},           {"train_loss", r.train_loss},
            {"train_mae", r.train_mae}, {"val_loss", r.val_loss}, {"val_mae", r.val_mae}};
}

nlohmann::json to_json(const TrainReport& r) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : r.epochs) epochs.push_back(to_json(e));
    return {{"best_epoch", r.best_epoch}, {"best_val_loss", r.best_val_loss}, {"seconds", r.seconds},
            {"epochs", std::move(epochs)}};
}

SsimConfig ssim_config_for(double target_max) {
    SsimConfig cfg;
    cfg.dynamic_range = target_max > 0.0 ? target_max : 1.0;
    return cfg;
}

Tensor predict(const ModelCheckpoint& ckpt, const Tensor& raw_input) {
    return ckpt.model.forward(ckpt.normalization.standardize(raw_input));
}

namespace {

void check_finite(double value, std::size_t epoch, std::size_t step, const char* what) {
    if (!std::isfinite(value))
        throw NumericalFailure(std::string("training diverged: non-finite ") + what + " at epoch " +
                               std::to_string(epoch) + ", step " + std::to_string(step));
}

}  // namespace

TrainResult train(const Dataset& dataset, const TrainConfig& cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();
    const auto train_idx = dataset.indices(Split::Train);
    const auto val_idx = dataset.indices(Split::Validation);
    if (train_idx.empty()) throw InvalidArgument("train: the training split is empty");
    if (cfg.model.in_channels != dataset.manifest.channels)
        throw InvalidArgument("train: model expects " + std::to_string(cfg.model.in_channels) +
                              " bands but the dataset has " + std::to_string(dataset.manifest.channels));

    const BandStats& stats = dataset.manifest.normalization;
    const SsimConfig ssim_cfg = ssim_config_for(dataset.manifest.target_max);
    std::vector<Tensor> inputs(dataset.samples.size());
    for (std::size_t i : train_idx) inputs[i] = stats.standardize(dataset.samples[i].input);
    for (std::size_t i : val_idx) inputs[i] = stats.standardize(dataset.samples[i].input);

    Model model = build_model(cfg.model, cfg.seed);
    auto params = model.parameters();
    Adamax optimizer;
    const CosineSchedule schedule{cfg.lr_max, cfg.lr_min, cfg.epochs};

    TrainResult result{ModelCheckpoint{model, stats, ssim_cfg.dynamic_range, loss_name(cfg.loss), cfg.seed}, {}};
    double best = std::numeric_limits<double>::infinity();
    std::size_t step = 0;

    std::vector<Tensor> grads;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = cosine_lr(epoch, schedule);

        std::vector<std::size_t> order = train_idx;
        std::mt19937_64 order_rng(mix_seed(cfg.seed, 0xE0000 + epoch));
        shuffle(order, order_rng);
        const std::uint64_t epoch_stream = mix_seed(cfg.seed, 0xA0000 + epoch);

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            grads.clear();
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t idx = order[b];
                Tensor x = inputs[idx];
                Tensor y = dataset.samples[idx].target;
                if (cfg.augment) {
                    std::mt19937_64 rng(mix_seed(epoch_stream, idx));
                    const AugmentParams p = draw_augment(cfg.augmentation, x.dim(1), x.dim(2), rng);
                    x = warp(x, p);
                    y = warp(y, p);
                }
                ModelTrace trace;
                const Tensor pred = model.forward(x, trace);
                const CompositeLoss loss = composite_loss(pred, y, cfg.loss, ssim_cfg);
                check_finite(loss.value, epoch, step, "loss");
                rec.train_loss += loss.value;
                rec.train_mae += loss.mae;
                auto g = model.backward(trace, loss.grad);
                if (grads.empty()) {
                    grads = std::move(g);
                } else {
                    for (std::size_t k = 0; k < grads.size(); ++k) grads[k] += g[k];
                }
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (auto& g : grads) g *= inv;
            try {
                optimizer.step(params, grads, rec.lr);
            } catch (const NumericalFailure& e) {
                throw NumericalFailure(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", step " +
                                       std::to_string(step));
            }
            ++step;
        }
        rec.train_loss /= static_cast<double>(order.size());
        rec.train_mae /= static_cast<double>(order.size());

        if (!val_idx.empty()) {
            for (std::size_t idx : val_idx) {
                const Tensor pred = model.forward(inputs[idx]);
                const CompositeLoss loss = composite_loss(pred, dataset.samples[idx].target, cfg.loss, ssim_cfg);
                rec.val_loss += loss.value;
                rec.val_mae += loss.mae;
            }
            rec.val_loss /= static_cast<double>(val_idx.size());
            rec.val_mae /= static_cast<double>(val_idx.size());
        } else {
            rec.val_loss = rec.train_loss;
            rec.val_mae = rec.train_mae;
        }
        check_finite(rec.val_loss, epoch, step, "validation loss");

        if (rec.val_loss < best) {
            best = rec.val_loss;
            result.best.model = model;
            result.report.best_epoch = epoch;
            result.report.best_val_loss = rec.val_loss;
        }
        result.report.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    result.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

}  // namespace socfno
