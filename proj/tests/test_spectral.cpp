#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "socfno/fft.hpp"
#include "socfno/spectral.hpp"

using namespace socfno;

TEST_CASE("mode mask matches its defining predicate") {
    for (auto [h, w, n] : {std::tuple{16u, 16u, 4u}, {128u, 128u, 8u}, {4u, 4u, 2u}, {9u, 7u, 3u}, {5u, 12u, 8u}}) {
        const ModeMask m = mode_mask(h, w, n);
        std::size_t count = 0;
        for (std::size_t k1 = 0; k1 < h; ++k1)
            for (std::size_t k2 = 0; k2 <= w / 2; ++k2) {
                const bool expect = (k1 < n || k1 >= h - std::min<std::size_t>(n, h)) && k2 < n;
                CHECK(m.at(k1, k2) == expect);
                count += expect;
            }
        CHECK(m.count == count);
    }
    CHECK(mode_mask(128, 128, 8).count == 128);
    const ModeMask small = mode_mask(4, 4, 2);
    CHECK(small.count == 8);
    for (std::size_t k1 = 0; k1 < 4; ++k1) {
        CHECK(small.at(k1, 0));
        CHECK(small.at(k1, 1));
        CHECK_FALSE(small.at(k1, 2));
    }
}

TEST_CASE("identity kernel with every mode kept is the identity") {
    SpectralWeights w = SpectralWeights::shared(2, 2, 8);
    w.set_coefficient(0, 0, 0, 1.0);
    w.set_coefficient(0, 1, 1, 1.0);
    std::mt19937_64 rng(1);
    const Tensor v = Tensor::normal({2, 8, 8}, 1.0, rng);
    CHECK(max_abs_diff(spectral_conv(v, w), v) < 1e-10);
}

TEST_CASE("constant input gives constant output scaled by Re R") {
    std::mt19937_64 rng(2);
    for (auto w : {SpectralWeights::shared(3, 2, 2), SpectralWeights::per_mode(3, 2, 2)}) {
        w.initialize(rng);
        Tensor v({2, 6, 6});
        for (std::size_t i = 0; i < 36; ++i) v[i] = 1.5, v[36 + i] = -0.5;
        const Tensor y = spectral_conv(v, w);
        for (std::size_t o = 0; o < 3; ++o) {
            const double expect = 1.5 * w.coefficient(0, o, 0).real() - 0.5 * w.coefficient(0, o, 1).real();
            for (std::size_t i = 0; i < 36; ++i) CHECK(std::abs(y.channel(o)[i] - expect) < 1e-12);
        }
    }
}

TEST_CASE("all modes kept equals direct circular convolution") {
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        SpectralWeights w = SpectralWeights::shared(2, 2, 8);
        w.initialize(rng);
        const Tensor v = Tensor::normal({2, 8, 8}, 1.0, rng);
        std::vector<std::vector<std::vector<double>>> kernel(2, std::vector<std::vector<double>>(2));
        for (std::size_t o = 0; o < 2; ++o)
            for (std::size_t i = 0; i < 2; ++i)
                kernel[o][i] = oracle::constant_spectrum_kernel(w.coefficient(0, o, i), 8, 8);
        worst = std::max(worst, max_abs_diff(spectral_conv(v, w), oracle::circular_conv(v, kernel)));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("truncated spectral conv matches the masked FFT pipeline") {
    std::mt19937_64 rng(4);
    for (auto [h, wd] : {std::pair{8u, 8u}, {9u, 7u}, {12u, 10u}}) {
        SpectralWeights w = SpectralWeights::per_mode(2, 3, 3);
        w.initialize(rng);
        const Tensor v = Tensor::normal({3, h, wd}, 1.0, rng);
        const ComplexTensor x = rfft2(v);
        const ModeMask mask = mode_mask(h, wd, 3);
        ComplexTensor s({2, h, half_width(wd)});
        for (std::size_t k1 = 0; k1 < h; ++k1)
            for (std::size_t k2 = 0; k2 < half_width(wd); ++k2) {
                if (!mask.at(k1, k2)) continue;
                const std::size_t i1 = k1 < 3 ? k1 : k1 + 6 - h;
                for (std::size_t o = 0; o < 2; ++o)
                    for (std::size_t i = 0; i < 3; ++i)
                        s.at(o, k1, k2) += w.coefficient(i1 * 3 + k2, o, i) * x.at(i, k1, k2);
            }
        CHECK(max_abs_diff(spectral_conv(v, w), irfft2(s, wd)) < 1e-10);
        CHECK(max_abs_diff(irfft2(spectral_conv_spectrum(v, w), wd), spectral_conv(v, w)) < 1e-10);
    }
}

TEST_CASE("spectral conv is linear in its input") {
    std::mt19937_64 rng(5);
    SpectralWeights w = SpectralWeights::per_mode(2, 2, 2);
    w.initialize(rng);
    const Tensor a = Tensor::normal({2, 6, 6}, 1.0, rng), b = Tensor::normal({2, 6, 6}, 1.0, rng);
    const Tensor lhs = spectral_conv(a * 2.0 + b, w);
    const Tensor rhs = spectral_conv(a, w) * 2.0 + spectral_conv(b, w);
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("invalid configurations are rejected") {
    SpectralWeights w = SpectralWeights::per_mode(1, 1, 4);
    CHECK_THROWS_AS(spectral_conv(Tensor({1, 6, 6}), w), InvalidArgument);
    CHECK_THROWS_AS(spectral_conv(Tensor({2, 8, 8}), w), InvalidArgument);
    SpectralWeights g = SpectralWeights::full_grid(1, 1, 8, 8);
    CHECK_THROWS_AS(spectral_conv(Tensor({1, 8, 6}), g), InvalidArgument);
    CHECK_THROWS_AS(mode_mask(4, 4, 0), InvalidArgument);
}

TEST_CASE("parameter counts of the kernel forms") {
    CHECK(spectral_parameter_count(SpectralForm::Shared, 24, 24, 8) == 1152);
    CHECK(spectral_parameter_count(SpectralForm::PerMode, 32, 32, 8) == 262144);
    CHECK(spectral_parameter_count(SpectralForm::PerModeFullGrid, 32, 32, 8, 128, 128) == 128u * 65u * 2u * 32u * 32u);
}
