#include <cmath>
#include <random>

#include "doctest.h"
#include "socfno/model.hpp"

using namespace socfno;

namespace {

// Closed-form parameter count of a dense or plain network.
std::size_t closed_form_count(const ModelConfig& c, std::size_t spectral_matrices) {
    const std::size_t h = c.hidden_channels;
    std::size_t total = c.in_channels * h + h;
    std::size_t width = h;
    for (std::size_t t = 0; t < c.n_fourier_layers; ++t) {
        total += h * width + h + spectral_matrices * 2 * h * width;
        width = c.dense ? width + h : h;
    }
    const std::size_t proj_in = c.dense ? h * (c.n_fourier_layers + 1) : h;
    return total + proj_in * c.out_channels + c.out_channels;
}

}  // namespace

TEST_CASE("forward shape contract for both presets") {
    std::mt19937_64 rng(1);
    const Tensor x = Tensor::normal({6, 128, 128}, 1.0, rng);
    for (const ModelConfig& cfg : {ModelConfig::fno_densenet(), ModelConfig::fno()}) {
        const Model m = build_model(cfg, 3);
        const Tensor y = m.forward(x);
        CHECK(y.shape() == Shape{1, 128, 128});
        CHECK(y.all_finite());
    }
    const Model m = build_model(ModelConfig::fno_densenet(), 3);
    CHECK(m.forward(Tensor::normal({6, 16, 20}, 1.0, rng)).shape() == Shape{1, 16, 20});
}

TEST_CASE("zero projection gives a zero prediction") {
    Model m = build_model(ModelConfig::fno_densenet(), 4);
    m.projection_weight().fill(0.0);
    m.projection_bias().fill(0.0);
    std::mt19937_64 rng(2);
    CHECK(m.forward(Tensor::normal({6, 16, 16}, 1.0, rng)).max_abs() == 0.0);
}

TEST_CASE("too-small spatial extent and wrong band count are rejected") {
    const Model m = build_model(ModelConfig::fno_densenet(), 0);
    CHECK_THROWS_AS(m.forward(Tensor({6, 8, 8})), InvalidArgument);
    CHECK_THROWS_AS(m.forward(Tensor({5, 16, 16})), InvalidArgument);
}

TEST_CASE("dense layers see the concatenation of all earlier outputs") {
    const ModelConfig d = ModelConfig::fno_densenet();
    CHECK(d.layer_input_widths() == std::vector<std::size_t>{24, 48, 72, 96});
    CHECK(d.projection_input_width() == 120);
    const ModelConfig p = ModelConfig::fno();
    CHECK(p.layer_input_widths() == std::vector<std::size_t>{32, 32, 32, 32});
    CHECK(p.projection_input_width() == 32);
}

TEST_CASE("default FNO-DenseNet parameter count") {
    const ModelConfig cfg = ModelConfig::fno_densenet();
    const Model m = build_model(cfg, 0);
    CHECK(count_params(m) == closed_form_count(cfg, 1));
    CHECK(count_params(m) == 17665);  // regression value
    CHECK(spectral_param_count(m) == 2 * 24 * (24 + 48 + 72 + 96));
}

TEST_CASE("per-mode FNO parameter count") {
    const ModelConfig cfg = ModelConfig::fno();
    const Model m(cfg);
    CHECK(count_params(m) == closed_form_count(cfg, 128));
    CHECK(spectral_param_count(m) == 4 * 262144);
}

TEST_CASE("registry order and names are stable") {
    Model m = build_model(ModelConfig::fno_densenet(), 0);
    const auto params = m.parameters();
    REQUIRE(params.size() == 2 + 3 * 4 + 2);
    CHECK(params.front().name == "lifting.weight");
    CHECK(params[2].name == "layers.0.weight");
    CHECK(params[4].name == "layers.0.spectral");
    CHECK(params.back().name == "projection.bias");
}

TEST_CASE("initialization is seeded") {
    const Model a = build_model(ModelConfig::fno_densenet(), 7);
    const Model b = build_model(ModelConfig::fno_densenet(), 7);
    const Model c = build_model(ModelConfig::fno_densenet(), 8);
    std::mt19937_64 rng(3);
    const Tensor x = Tensor::normal({6, 16, 16}, 1.0, rng);
    CHECK(a.forward(x) == b.forward(x));
    CHECK_FALSE(a.forward(x) == c.forward(x));
}

TEST_CASE("float32 rounding is idempotent") {
    Model m = build_model(ModelConfig::fno_densenet(), 5);
    m.round_to_float32();
    for (const auto& [name, t] : std::as_const(m).parameters())
        for (double v : t->values()) CHECK(static_cast<double>(static_cast<float>(v)) == v);
}

TEST_CASE("config JSON round trip") {
    ModelConfig cfg = ModelConfig::fno();
    cfg.activation = Activation::GELU;
    cfg.full_grid_height = 16;
    cfg.full_grid_width = 16;
    const ModelConfig back = model_config_from_json(to_json(cfg));
    CHECK(to_json(back) == to_json(cfg));
    ModelConfig bad = ModelConfig::fno_densenet();
    bad.full_grid_height = 16;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}
