#pragma once

#include <random>
#include <string>

#include "socfno/spectral.hpp"
#include "socfno/tensor.hpp"

namespace socfno {

enum class Norm { None, Instance };
enum class Activation { ReLU, GELU, Identity };

std::string to_string(Norm norm);
std::string to_string(Activation activation);
Norm parse_norm(const std::string& name);
Activation parse_activation(const std::string& name);

inline constexpr double kInstanceNormEps = 1e-5;

// Pointwise (1x1) linear map over channels: y[o] = sum_i W[o,i] x[i] + b[o].

Tensor pointwise_forward(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct PointwiseGrads {
    Tensor input;
    Tensor weight;
    Tensor bias;
};

PointwiseGrads pointwise_backward(const Tensor& x, const Tensor& weight, const Tensor& upstream);

/// Kaiming-uniform weights (bound sqrt(6 / fan_in)) and zero bias.
void kaiming_uniform(Tensor& weight, std::mt19937_64& rng);

// Instance normalization without affine terms: per channel, per image.

struct InstanceNormCache {
    Tensor normalized;
    std::vector<double> inv_std;
};

Tensor instance_norm(const Tensor& x, double eps = kInstanceNormEps, InstanceNormCache* cache = nullptr);
Tensor instance_norm_backward(const Tensor& upstream, const InstanceNormCache& cache);

Tensor activate(const Tensor& x, Activation activation);
/// Gradient through the activation given its pre-activation input.
Tensor activate_backward(const Tensor& pre, const Tensor& upstream, Activation activation);

/// One Fourier layer: act(norm(W v + b + K v)) with K a spectral convolution.
struct FourierLayer {
    Tensor weight;  // [C_out, C_in]
    Tensor bias;    // [C_out]
    SpectralWeights spectral;
    Norm norm = Norm::Instance;
    Activation activation = Activation::ReLU;

    std::size_t in_channels() const { return weight.dim(1); }
    std::size_t out_channels() const { return weight.dim(0); }
};

FourierLayer make_fourier_layer(std::size_t in_channels, std::size_t out_channels, SpectralWeights spectral,
                                Norm norm, Activation activation);

struct FourierLayerCache {
    Tensor input;
    SpectralCache spectral;
    InstanceNormCache norm;
    Tensor pre_activation;
};

Tensor fourier_layer_forward(const Tensor& v, const FourierLayer& layer, FourierLayerCache* cache = nullptr);

struct FourierLayerGrads {
    Tensor input;
    Tensor weight;
    Tensor bias;
    Tensor spectral;
};

FourierLayerGrads fourier_layer_backward(const Tensor& upstream, const FourierLayer& layer,
                                         const FourierLayerCache& cache);

}  // namespace socfno
