#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "socfno/checkpoint.hpp"
#include "socfno/pgm.hpp"

using namespace socfno;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "socfno_test_ckpt";
    fs::create_directories(dir);
    return (dir / name).string();
}

ModelCheckpoint sample_checkpoint(const ModelConfig& cfg, std::uint64_t seed) {
    ModelCheckpoint c{build_model(cfg, seed), {}, 17.5, "mae+dssim", seed};
    c.normalization.mean.assign(cfg.in_channels, 0.25);
    c.normalization.stddev.assign(cfg.in_channels, 1.5);
    return c;
}

}  // namespace

TEST_CASE("float32 checkpoint reproduces forward outputs bit for bit") {
    ModelCheckpoint c = sample_checkpoint(ModelConfig::fno_densenet(), 3);
    c.model.round_to_float32();
    const std::string path = temp_path("f32");
    save_checkpoint(path, c);
    const ModelCheckpoint back = load_checkpoint(path);
    std::mt19937_64 rng(1);
    const Tensor x = Tensor::normal({6, 16, 16}, 1.0, rng);
    CHECK(back.model.forward(x) == c.model.forward(x));
    CHECK(back.target_max == 17.5);
    CHECK(back.loss == "mae+dssim");
    CHECK(back.seed == 3);
    CHECK(back.normalization.stddev == c.normalization.stddev);
}

TEST_CASE("float64 checkpoint is exact without rounding") {
    ModelConfig cfg = ModelConfig::fno();
    cfg.hidden_channels = 5;
    cfg.modes = 3;
    cfg.activation = Activation::GELU;
    const ModelCheckpoint c = sample_checkpoint(cfg, 4);
    const std::string path = temp_path("f64");
    save_checkpoint(path, c, StorageType::Float64);
    const ModelCheckpoint back = load_checkpoint(path);
    CHECK(to_json(back.model.config()) == to_json(cfg));
    std::mt19937_64 rng(2);
    const Tensor x = Tensor::normal({6, 8, 8}, 1.0, rng);
    CHECK(back.model.forward(x) == c.model.forward(x));
    CHECK(checkpoint_kind(path) == "model");
}

TEST_CASE("damaged checkpoints are rejected") {
    const ModelCheckpoint c = sample_checkpoint(ModelConfig::fno_densenet(), 5);
    const std::string path = temp_path("damaged");
    save_checkpoint(path, c);
    const std::string blob = read_file(path + ".bin");
    write_file(path + ".bin", blob.substr(0, blob.size() - 8));
    CHECK_THROWS_AS(load_checkpoint(path), FormatError);
    CHECK_THROWS_AS(load_checkpoint(temp_path("absent")), NotFound);
}

TEST_CASE("forest checkpoints") {
    std::mt19937_64 rng(3);
    PixelTable t;
    t.features = 6;
    std::vector<double> row(6);
    for (int i = 0; i < 120; ++i) {
        for (double& v : row) v = uniform01(rng);
        t.push(row, row[0] + row[3]);
    }
    ForestConfig cfg;
    cfg.n_trees = 2;
    const Forest f = fit_forest(t, cfg);
    const std::string path = temp_path("forest");
    save_forest(path, f);
    CHECK(checkpoint_kind(path) == "forest");
    const Tensor raster = Tensor::uniform({6, 4, 4}, 0.0, 1.0, rng);
    CHECK(predict_forest(load_forest(path), raster) == predict_forest(f, raster));
}

TEST_CASE("PGM quantization bound and round trip") {
    std::mt19937_64 rng(4);
    const Tensor map = Tensor::uniform({1, 9, 13}, -3.0, 40.0, rng);
    double lo = map[0], hi = map[0];
    for (double v : map.values()) lo = std::min(lo, v), hi = std::max(hi, v);
    const PgmImage img = quantize(map, lo, hi);
    CHECK(img.width == 13);
    CHECK(img.height == 9);
    const std::string path = temp_path("map.pgm");
    write_pgm(path, img);
    const PgmImage back = read_pgm(path);
    CHECK(back.pixels == img.pixels);
    const Tensor deq = dequantize(back, lo, hi);
    const double step = (hi - lo) / 255.0;
    CHECK(max_abs_diff(deq.reshaped(map.shape()), map) <= 0.5 * step * (1.0 + 1e-12));

    const std::string bytes = read_file(path);
    CHECK(bytes.rfind("P5\n", 0) == 0);
    CHECK(bytes.size() == std::string("P5\n13 9\n255\n").size() + 117);

    const PgmImage flat = quantize(Tensor({1, 2, 2}, 5.0), 5.0, 5.0);
    for (auto p : flat.pixels) CHECK(p == 0);
    CHECK_THROWS_AS(decode_pgm("P2\n1 1\n255\n0"), FormatError);
    CHECK_THROWS_AS(decode_pgm("P5\n2 2\n255\n\x01"), FormatError);
}
