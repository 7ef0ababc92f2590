#include "socfno/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace socfno {

namespace {

constexpr int kMaxFrequency = 4;
constexpr double kSpectralFalloff = 2.0;
constexpr double kLatentGain = 0.25;

std::vector<double> latent_field(std::size_t height, std::size_t width, std::mt19937_64& rng) {
    std::vector<double> field(height * width, 0.0);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int a = -kMaxFrequency; a <= kMaxFrequency; ++a) {
        for (int b = 0; b <= kMaxFrequency; ++b) {
            if (a <= 0 && b == 0) continue;  // DC and mirrored duplicates
            const double amp = standard_normal(rng) * std::exp(-(a * a + b * b) / (2.0 * kSpectralFalloff * kSpectralFalloff));
            const double phase = uniform(rng, 0.0, two_pi);
            for (std::size_t i = 0; i < height; ++i)
                for (std::size_t j = 0; j < width; ++j) {
                    const double arg = two_pi * (a * static_cast<double>(i) / static_cast<double>(height) +
                                                 b * static_cast<double>(j) / static_cast<double>(width));
                    field[i * width + j] += amp * std::cos(arg + phase);
                }
        }
    }
    double mean = 0.0;
    for (double v : field) mean += v;
    mean /= static_cast<double>(field.size());
    double var = 0.0;
    for (double v : field) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(field.size()));
    for (double& v : field) v = sd > 0.0 ? (v - mean) / sd : 0.0;
    return field;
}

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

}  // namespace

Tensor synth_target(const Tensor& bands) {
    if (bands.rank() != 3 || bands.dim(0) != 6) throw InvalidArgument("synth_target: expected [6,H,W] bands");
    const std::size_t height = bands.dim(1), width = bands.dim(2);
    const std::size_t plane = height * width;
    std::vector<double> ndvi(plane), moisture(plane);
    for (std::size_t i = 0; i < plane; ++i) {
        const double red = bands.channel(2)[i], nir = bands.channel(3)[i], swir1 = bands.channel(4)[i];
        ndvi[i] = (nir - red) / (nir + red);
        moisture[i] = (nir - swir1) / (nir + swir1);
    }

    // Separable circular blur.
    const auto r = static_cast<long>(kSynthContextRadius);
    std::vector<double> k(2 * kSynthContextRadius + 1);
    double total = 0.0;
    for (long d = -r; d <= r; ++d) {
        k[d + r] = std::exp(-static_cast<double>(d * d) / (2.0 * kSynthContextSigma * kSynthContextSigma));
        total += k[d + r];
    }
    for (double& v : k) v /= total;
    const auto wrap = [](long i, std::size_t n) {
        const long m = static_cast<long>(n);
        return static_cast<std::size_t>(((i % m) + m) % m);
    };
    std::vector<double> tmp(plane, 0.0), context(plane, 0.0);
    for (std::size_t i = 0; i < height; ++i)
        for (std::size_t j = 0; j < width; ++j)
            for (long d = -r; d <= r; ++d)
                tmp[i * width + j] += k[d + r] * ndvi[i * width + wrap(static_cast<long>(j) + d, width)];
    for (std::size_t i = 0; i < height; ++i)
        for (std::size_t j = 0; j < width; ++j)
            for (long d = -r; d <= r; ++d)
                context[i * width + j] += k[d + r] * tmp[wrap(static_cast<long>(i) + d, height) * width + j];

    Tensor target({1, height, width});
    for (std::size_t i = 0; i < plane; ++i)
        target[i] = kSynthScale * softplus(1.5 * ndvi[i] + moisture[i] + 2.0 * context[i] - 0.5) + kSynthOffset;
    return target;
}

Dataset synth_generate(std::uint64_t seed, std::size_t n, std::size_t height, std::size_t width) {
    if (n < 10) throw InvalidArgument("synth: need at least 10 samples (minimum sample count), got " + std::to_string(n));
    if (height == 0 || width == 0) throw InvalidArgument("synth: raster extents must be positive");
    Dataset ds;
    ds.samples.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        std::mt19937_64 rng(mix_seed(seed, 0x100000 + s));
        std::array<std::vector<double>, 3> z;
        for (auto& f : z) f = latent_field(height, width, rng);
        Tensor bands({6, height, width});
        for (std::size_t c = 0; c < 6; ++c) {
            double* p = bands.channel(c);
            for (std::size_t i = 0; i < height * width; ++i) {
                double mix = 0.0;
                for (std::size_t k = 0; k < 3; ++k) mix += kSynthMixing[c][k] * z[k][i];
                p[i] = static_cast<float>(kSynthBase[c] * std::exp(kLatentGain * mix));
            }
        }
        Tensor target = synth_target(bands);
        for (double& v : target.values()) v = static_cast<float>(v);
        char id[32];
        std::snprintf(id, sizeof id, "syn%05zu", s);
        ds.samples.push_back({id, std::move(bands), std::move(target)});
    }
    assign_splits(ds, seed);
    return ds;
}

}  // namespace socfno
