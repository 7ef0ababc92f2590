// Command-line driver: synth, train, eval, predict, matrix.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "socfno/experiment.hpp"
#include "socfno/synth.hpp"

using namespace socfno;

namespace {

// Flags shared by train and matrix; unset flags leave the config file value alone.
struct ExperimentFlags {
    std::string config;
    std::optional<std::string> dataset, out, model, loss, activation, norm, dtype;
    std::optional<std::size_t> epochs, batch_size, repeats, hidden, layers, modes, trees, depth;
    std::optional<std::uint64_t> seed;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> models, losses;
    std::optional<double> lr_max, lr_min;
    bool no_augment = false, full_grid = false, verbose = false;

    void add_to(CLI::App* app, bool matrix) {
        app->add_option("--config", config, "JSON experiment config; flags override its fields");
        app->add_option("--dataset", dataset, "dataset path (.nras)");
        app->add_option("--out", out, "output directory");
        if (matrix) {
            app->add_option("--models", models, "matrix rows (forest, fno, fno-densenet)");
            app->add_option("--losses", losses, "matrix columns (mae, dssim, mae+dssim)");
        } else {
            app->add_option("--model", model, "fno | fno-densenet | forest");
            app->add_option("--loss", loss, "mae | dssim | mae+dssim");
        }
        app->add_option("--epochs", epochs);
        app->add_option("--batch-size", batch_size);
        app->add_option("--repeats", repeats);
        app->add_option("--seed", seed, "base seed; repeat r uses seed + r");
        app->add_option("--seeds", seeds, "explicit per-repeat seeds");
        app->add_option("--lr-max", lr_max);
        app->add_option("--lr-min", lr_min);
        app->add_flag("--no-augment", no_augment);
        app->add_option("--hidden", hidden, "hidden channel override");
        app->add_option("--layers", layers, "Fourier layer count override");
        app->add_option("--modes", modes, "retained modes N override");
        app->add_flag("--full-grid", full_grid, "per-mode kernels over the whole half spectrum (fno)");
        app->add_option("--activation", activation, "relu | gelu | identity");
        app->add_option("--norm", norm, "instance | none");
        app->add_option("--dtype", dtype, "checkpoint storage: float32 | float64");
        app->add_option("--trees", trees, "forest tree count");
        app->add_option("--depth", depth, "forest maximum depth");
        app->add_flag("-v,--verbose", verbose);
    }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg;
        if (!config.empty()) cfg = experiment_config_from_json(nlohmann::json::parse(read_file(config)), cfg);
        if (dataset) cfg.dataset = *dataset;
        if (out) cfg.out_dir = *out;
        if (model) cfg.model = *model;
        if (loss) cfg.loss = *loss;
        if (!models.empty()) cfg.models = models;
        if (!losses.empty()) cfg.losses = losses;
        if (epochs) cfg.epochs = *epochs;
        if (batch_size) cfg.batch_size = *batch_size;
        if (repeats) cfg.repeats = *repeats;
        if (seed) cfg.seed = *seed;
        if (!seeds.empty()) {
            cfg.seeds = seeds;
            if (!repeats) cfg.repeats = seeds.size();
        }
        if (lr_max) cfg.lr_max = *lr_max;
        if (lr_min) cfg.lr_min = *lr_min;
        if (no_augment) cfg.augment = false;
        if (hidden) cfg.hidden_channels = *hidden;
        if (layers) cfg.n_fourier_layers = *layers;
        if (modes) cfg.modes = *modes;
        if (full_grid) cfg.full_grid = true;
        if (activation) cfg.activation = *activation;
        if (norm) cfg.norm = *norm;
        if (dtype) cfg.dtype = *dtype;
        if (trees) cfg.forest.n_trees = *trees;
        if (depth) cfg.forest.max_depth = *depth;
        if (verbose) cfg.verbose = true;
        if (cfg.dataset.empty()) throw InvalidArgument("no dataset given (--dataset or config 'dataset')");
        cfg.validate();
        return cfg;
    }
};

void print_eval(const EvalOutcome& e) {
    const auto& a = e.aggregate;
    std::printf("images %zu, repeats %zu\n", e.ids.size(), e.repeats.size());
    std::printf("RMSE  %.4f +- %.4f g/kg\n", a.rmse.mean, a.rmse.std);
    std::printf("MAPE  %.2f +- %.2f %%\n", a.mape.mean, a.mape.std);
    std::printf("SSIM  %.4f +- %.4f\n", a.ssim.mean, a.ssim.std);
}

int run(int argc, char** argv) {
    CLI::App app{"Fourier neural operator toolkit for soil-carbon raster regression"};
    app.require_subcommand(1);

    std::uint64_t synth_seed = 0;
    std::size_t synth_n = 0, synth_size = 128;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "generate a synthetic .nras dataset");
    synth->add_option("--seed", synth_seed)->required();
    synth->add_option("--n", synth_n, "sample count (>= 10)")->required();
    synth->add_option("--size", synth_size, "raster height and width");
    synth->add_option("--out", synth_out, "output path")->required();

    ExperimentFlags train_flags, matrix_flags;
    auto* train_cmd = app.add_subcommand("train", "train one setting for k repeats");
    train_flags.add_to(train_cmd, false);
    auto* matrix_cmd = app.add_subcommand("matrix", "train and evaluate the model x loss grid");
    matrix_flags.add_to(matrix_cmd, true);

    std::vector<std::string> eval_ckpts;
    std::string eval_dataset, eval_split = "test", eval_out, eval_dump;
    bool self_oracle = false;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate checkpoints; several are averaged as repeats");
    eval_cmd->add_option("--checkpoint", eval_ckpts, "checkpoint path(s)");
    eval_cmd->add_option("--dataset", eval_dataset)->required();
    eval_cmd->add_option("--split", eval_split, "train | val | test");
    eval_cmd->add_option("--out", eval_out, "report JSON path");
    eval_cmd->add_option("--dump-predictions", eval_dump, "write predictions as JSON");
    eval_cmd->add_flag("--self-oracle", self_oracle, "use the targets as predictions (harness check)");

    std::string pred_ckpt, pred_dataset, pred_id, pred_out;
    auto* predict_cmd = app.add_subcommand("predict", "export predicted and ground-truth maps as PGM");
    predict_cmd->add_option("--checkpoint", pred_ckpt)->required();
    predict_cmd->add_option("--dataset", pred_dataset)->required();
    predict_cmd->add_option("--id", pred_id)->required();
    predict_cmd->add_option("--out", pred_out, "output path prefix")->required();

    CLI11_PARSE(app, argc, argv);

    if (*synth) {
        const Dataset ds = synth_generate(synth_seed, synth_n, synth_size, synth_size);
        save_dataset(synth_out, ds);
        const SplitSizes s = split_sizes(synth_n);
        std::printf("wrote %s (%zu samples, %zux%zu, split %zu/%zu/%zu)\n", synth_out.c_str(), synth_n, synth_size,
                    synth_size, s.train, s.validation, s.test);
    } else if (*train_cmd) {
        const ExperimentConfig cfg = train_flags.resolve();
        const Dataset ds = load_dataset(cfg.dataset);
        for (const auto& r : cmd_train(cfg, ds)) {
            if (r.report)
                std::printf("seed %llu: best epoch %zu, val loss %.6f, first/last train loss %.6f/%.6f -> %s\n",
                            static_cast<unsigned long long>(r.seed), r.report->best_epoch + 1, r.report->best_val_loss,
                            r.report->epochs.front().train_loss, r.report->epochs.back().train_loss,
                            r.checkpoint.c_str());
            else
                std::printf("seed %llu: forest -> %s\n", static_cast<unsigned long long>(r.seed), r.checkpoint.c_str());
        }
    } else if (*eval_cmd) {
        const Dataset ds = load_dataset(eval_dataset);
        const EvalOutcome e = cmd_eval(eval_ckpts, ds, parse_split(eval_split), self_oracle, eval_dump);
        print_eval(e);
        if (!eval_out.empty()) write_json(eval_out, to_json(e));
    } else if (*predict_cmd) {
        const Dataset ds = load_dataset(pred_dataset);
        const PredictOutcome p = cmd_predict(pred_ckpt, ds, pred_id, pred_out);
        std::printf("wrote %s, %s, %s\n", p.prediction_pgm.c_str(), p.truth_pgm.c_str(), p.sidecar.c_str());
    } else if (*matrix_cmd) {
        const ExperimentConfig cfg = matrix_flags.resolve();
        const Dataset ds = load_dataset(cfg.dataset);
        const MatrixOutcome m = cmd_matrix(cfg, ds);
        std::printf("%s\n", to_json(m).dump(2).c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NotFound& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const NumericalFailure& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
