#include <cmath>
#include <limits>
#include <random>

#include "diff_ops.hpp"
#include "doctest.h"

using namespace socfno;

TEST_CASE("linear map y = 2x checks exactly") {
    DifferentiableOp op{"double", [](std::span<const Tensor> in) { return in[0] * 2.0; },
                        [](std::span<const Tensor>, const Tensor& up) { return std::vector<Tensor>{up * 2.0}; }};
    std::mt19937_64 rng(1);
    CHECK(grad_check(op, {Tensor::normal({2, 3, 3}, 1.0, rng)}, 1e-5) <= 1e-9);
}

TEST_CASE("a wrong gradient is caught") {
    DifferentiableOp op{"square", [](std::span<const Tensor> in) {
                            Tensor y = in[0];
                            for (double& v : y.values()) v *= v;
                            return y;
                        },
                        [](std::span<const Tensor> in, const Tensor& up) {
                            Tensor g = up;  // missing the factor 2x
                            (void)in;
                            return std::vector<Tensor>{g};
                        }};
    std::mt19937_64 rng(2);
    CHECK(grad_check(op, {Tensor::normal({8}, 1.0, rng)}, 1e-5) > 1e-2);
}

TEST_CASE("non-finite forward names the op") {
    DifferentiableOp op{"blowup",
                        [](std::span<const Tensor> in) {
                            Tensor y = in[0];
                            y[0] = std::numeric_limits<double>::infinity();
                            return y;
                        },
                        [](std::span<const Tensor>, const Tensor& up) { return std::vector<Tensor>{up}; }};
    try {
        grad_check(op, {Tensor({3}, 1.0)}, 1e-5);
        FAIL("expected NumericalFailure");
    } catch (const NumericalFailure& e) {
        CHECK(std::string(e.what()).find("blowup") != std::string::npos);
    }
}

TEST_CASE("eps outside the supported range is rejected") {
    DifferentiableOp op{"id", [](std::span<const Tensor> in) { return in[0]; },
                        [](std::span<const Tensor>, const Tensor& up) { return std::vector<Tensor>{up}; }};
    CHECK_THROWS_AS(grad_check(op, {Tensor({1}, 1.0)}, 1.0), InvalidArgument);
}

TEST_CASE("concat and split are adjoint under grad_check") {
    DifferentiableOp op{"concat", [](std::span<const Tensor> in) { return concat_channels(in); },
                        [](std::span<const Tensor> in, const Tensor& up) {
                            std::vector<std::size_t> widths;
                            for (const auto& t : in) widths.push_back(t.dim(0));
                            return split_channels(up, widths);
                        }};
    std::mt19937_64 rng(3);
    CHECK(grad_check(op, {Tensor::normal({1, 4, 4}, 1.0, rng), Tensor::normal({2, 4, 4}, 1.0, rng)}, 1e-5) <= 1e-9);
}

TEST_CASE("spectral_conv gradients") {
    std::mt19937_64 rng(4);
    const Tensor v = Tensor::normal({2, 8, 8}, 1.0, rng);
    for (auto proto : {SpectralWeights::shared(3, 2, 3), SpectralWeights::per_mode(3, 2, 3),
                       SpectralWeights::full_grid(3, 2, 8, 8), SpectralWeights::shared(3, 2, 16)}) {
        auto c = diffops::spectral_conv_case(proto, v, rng);
        CHECK(grad_check(c.op, c.inputs, 1e-5) <= 1e-4);
    }
    // Odd extents exercise the missing Nyquist column.
    auto c = diffops::spectral_conv_case(SpectralWeights::per_mode(2, 2, 2), Tensor::normal({2, 7, 9}, 1.0, rng), rng);
    CHECK(grad_check(c.op, c.inputs, 1e-5) <= 1e-4);
}

TEST_CASE("pointwise and instance norm gradients") {
    std::mt19937_64 rng(5);
    auto p = diffops::pointwise_case(6, 4, 5, 5, rng);
    CHECK(grad_check(p.op, p.inputs, 1e-5) <= 1e-4);
    auto n = diffops::instance_norm_case(3, 6, 6, rng);
    CHECK(grad_check(n.op, n.inputs, 1e-5) <= 1e-4);
}

TEST_CASE("Fourier layer gradients") {
    std::mt19937_64 rng(6);
    for (Norm norm : {Norm::None, Norm::Instance})
        for (Activation act : {Activation::ReLU, Activation::GELU, Activation::Identity}) {
            auto c = diffops::random_fourier_layer_case(2, 3, 3, 8, 8, norm, act, rng);
            CHECK_MESSAGE(grad_check(c.op, c.inputs, 1e-5) <= 1e-4, to_string(norm), " ", to_string(act));
        }
}

TEST_CASE("bias before instance norm has zero gradient") {
    std::mt19937_64 rng(9);
    SpectralWeights s = SpectralWeights::shared(3, 2, 3);
    s.initialize(rng);
    FourierLayer layer = make_fourier_layer(2, 3, s, Norm::Instance, Activation::GELU);
    layer.weight = Tensor::normal({3, 2}, 0.5, rng);
    layer.bias = Tensor::normal({3}, 0.5, rng);
    FourierLayerCache cache;
    const Tensor v = Tensor::normal({2, 8, 8}, 1.0, rng);
    const Tensor y = fourier_layer_forward(v, layer, &cache);
    CHECK(fourier_layer_backward(Tensor::normal(y.shape(), 1.0, rng), layer, cache).bias.max_abs() <= 1e-12);
    // Shifting the bias leaves the output unchanged up to rounding.
    FourierLayer shifted = layer;
    for (double& b : shifted.bias.values()) b += 0.75;
    CHECK(max_abs_diff(fourier_layer_forward(v, shifted), y) < 1e-12);
}

TEST_CASE("SSIM and composite loss gradients") {
    std::mt19937_64 rng(7);
    SsimConfig cfg;
    cfg.dynamic_range = 2.0;
    const Tensor x = Tensor::uniform({1, 16, 16}, 0.0, 2.0, rng);
    const Tensor y = Tensor::uniform({1, 16, 16}, 0.0, 2.0, rng);
    auto s = diffops::ssim_case(x, y, cfg);
    CHECK(grad_check(s.op, s.inputs, 1e-5) <= 1e-4);
    const Tensor t = diffops::offset_target(x, rng);
    for (const char* name : {"mae", "dssim", "mae+dssim"}) {
        auto c = diffops::composite_case(x, t, loss_config_for(name), cfg);
        CHECK_MESSAGE(grad_check(c.op, c.inputs, 1e-5) <= 1e-4, name);
    }
}

TEST_CASE("small model end to end") {
    std::mt19937_64 rng(8);
    for (bool dense : {true, false})
        for (Activation act : {Activation::GELU, Activation::ReLU}) {
            ModelConfig cfg = dense ? ModelConfig::fno_densenet() : ModelConfig::fno();
            cfg.hidden_channels = 3;
            cfg.n_fourier_layers = 2;
            cfg.modes = 3;
            cfg.activation = act;
            const Model m = build_model(cfg, 5);
            const Tensor x = Tensor::normal({6, 8, 8}, 1.0, rng);
            const Tensor t = diffops::offset_target(m.forward(x), rng);
            SsimConfig scfg;
            scfg.window = 5;
            auto c = diffops::model_loss_case(m, x, t, loss_config_for("mae+dssim"), scfg);
            CHECK_MESSAGE(grad_check(c.op, c.inputs, 1e-5) <= 1e-4, dense, " ", to_string(act));
            CHECK(diffops::inert_gradient(m, x, t, loss_config_for("mae+dssim"), scfg) <= 1e-12);
        }
}
