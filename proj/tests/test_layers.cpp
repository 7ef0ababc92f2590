#include <cmath>
#include <random>

#include "doctest.h"
#include "socfno/layers.hpp"

using namespace socfno;

TEST_CASE("all-zero ReLU layer outputs zeros") {
    FourierLayer layer = make_fourier_layer(3, 4, SpectralWeights::shared(4, 3, 2), Norm::None, Activation::ReLU);
    std::mt19937_64 rng(1);
    const Tensor y = fourier_layer_forward(Tensor::normal({3, 8, 8}, 1.0, rng), layer);
    CHECK(y.shape() == Shape{4, 8, 8});
    CHECK(y.max_abs() == 0.0);
}

TEST_CASE("identity activation, no norm, zero kernel is a 1x1 conv") {
    std::mt19937_64 rng(2);
    FourierLayer layer =
        make_fourier_layer(3, 2, SpectralWeights::per_mode(2, 3, 2), Norm::None, Activation::Identity);
    layer.weight = Tensor::normal({2, 3}, 1.0, rng);
    layer.bias = Tensor::normal({2}, 1.0, rng);
    const Tensor v = Tensor::normal({3, 8, 8}, 1.0, rng);
    const Tensor y = fourier_layer_forward(v, layer);
    for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t h = 0; h < 8; ++h)
            for (std::size_t w = 0; w < 8; ++w) {
                double s = layer.bias[o];
                for (std::size_t i = 0; i < 3; ++i) s += layer.weight[o * 3 + i] * v.at(i, h, w);
                CHECK(std::abs(y.at(o, h, w) - s) < 1e-12);
            }
}

TEST_CASE("layer rejects a channel mismatch") {
    FourierLayer layer = make_fourier_layer(3, 2, SpectralWeights::shared(2, 3, 2), Norm::None, Activation::ReLU);
    CHECK_THROWS_AS(fourier_layer_forward(Tensor({4, 8, 8}), layer), InvalidArgument);
    CHECK_THROWS_AS(make_fourier_layer(3, 2, SpectralWeights::shared(2, 2, 2), Norm::None, Activation::ReLU),
                    InvalidArgument);
}

TEST_CASE("instance norm standardizes each channel") {
    std::mt19937_64 rng(3);
    Tensor x = Tensor::normal({2, 6, 6}, 3.0, rng);
    for (std::size_t i = 0; i < 36; ++i) x[i] += 5.0;
    const Tensor y = instance_norm(x);
    for (std::size_t c = 0; c < 2; ++c) {
        double m = 0.0, v = 0.0;
        for (std::size_t i = 0; i < 36; ++i) m += y.channel(c)[i];
        m /= 36.0;
        for (std::size_t i = 0; i < 36; ++i) v += (y.channel(c)[i] - m) * (y.channel(c)[i] - m);
        v /= 36.0;
        CHECK(std::abs(m) < 1e-12);
        CHECK(std::abs(v - 1.0) < 1e-5);
    }
}

TEST_CASE("activations") {
    Tensor x({3}, std::vector<double>{-1.0, 0.0, 2.0});
    const Tensor r = activate(x, Activation::ReLU);
    CHECK(r[0] == 0.0);
    CHECK(r[2] == 2.0);
    const Tensor g = activate(x, Activation::GELU);
    CHECK(std::abs(g[2] - 2.0 * 0.5 * (1.0 + std::erf(2.0 / std::sqrt(2.0)))) < 1e-12);
    CHECK(activate(x, Activation::Identity) == x);
    CHECK(parse_activation("gelu") == Activation::GELU);
    CHECK(parse_norm(to_string(Norm::None)) == Norm::None);
    CHECK_THROWS_AS(parse_activation("tanh"), InvalidArgument);
}

TEST_CASE("kaiming init stays within its bound") {
    std::mt19937_64 rng(4);
    Tensor w({5, 24});
    kaiming_uniform(w, rng);
    const double bound = std::sqrt(6.0 / 24.0);
    CHECK(w.max_abs() <= bound);
    CHECK(w.max_abs() > 0.5 * bound);
}
