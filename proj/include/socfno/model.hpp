#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "socfno/layers.hpp"
#include "socfno/tensor.hpp"

namespace socfno {

/// Architecture description shared by FNO and FNO-DenseNet.
struct ModelConfig {
    std::size_t in_channels = 6;
    std::size_t out_channels = 1;
    std::size_t hidden_channels = 24;
    std::size_t n_fourier_layers = 4;
    std::size_t modes = 8;
    bool dense = true;
    bool shared_r = true;
    // Nonzero extents select per-mode kernels over the whole half spectrum of
    // this grid (requires shared_r = false). Zero keeps the 2N x N layout.
    std::size_t full_grid_height = 0;
    std::size_t full_grid_width = 0;
    Norm norm = Norm::Instance;
    Activation activation = Activation::ReLU;

    /// Dense, shared-R network with 24-channel layers.
    static ModelConfig fno_densenet();
    /// Plain chain with per-mode kernels and 32-channel layers.
    static ModelConfig fno();

    void validate() const;
    SpectralForm spectral_form() const;
    /// Input width of each Fourier layer.
    std::vector<std::size_t> layer_input_widths() const;
    std::size_t projection_input_width() const;
};

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Activations saved by a forward pass for the backward pass.
struct ModelTrace {
    Tensor input;
    Tensor lifted;
    std::vector<FourierLayerCache> layers;
    std::vector<Tensor> outputs;  // per Fourier layer
    Tensor features;              // projection input
};

/// Lifting (1x1) -> Fourier layers -> projection (1x1, no activation).
class Model {
public:
    /// All parameters zero; see build_model for an initialized network.
    explicit Model(ModelConfig cfg);

    const ModelConfig& config() const noexcept { return cfg_; }

    /// Named parameters in a stable registry order.
    std::vector<ParameterRef> parameters();
    std::vector<std::pair<std::string, const Tensor*>> parameters() const;
    std::size_t parameter_count() const;

    Tensor forward(const Tensor& x) const;
    Tensor forward(const Tensor& x, ModelTrace& trace) const;

    /// Parameter gradients in registry order. grad_input, when given, receives
    /// the gradient with respect to the model input.
    std::vector<Tensor> backward(const ModelTrace& trace, const Tensor& upstream, Tensor* grad_input = nullptr) const;

    void initialize(std::uint64_t seed);
    /// Round every parameter to the nearest binary32 value.
    void round_to_float32();

    Tensor& lifting_weight() { return lifting_weight_; }
    Tensor& lifting_bias() { return lifting_bias_; }
    std::vector<FourierLayer>& layers() { return layers_; }
    const std::vector<FourierLayer>& layers() const { return layers_; }
    Tensor& projection_weight() { return projection_weight_; }
    Tensor& projection_bias() { return projection_bias_; }

private:
    void check_input(const Tensor& x) const;

    ModelConfig cfg_;
    Tensor lifting_weight_;
    Tensor lifting_bias_;
    std::vector<FourierLayer> layers_;
    Tensor projection_weight_;
    Tensor projection_bias_;
};

Model build_model(const ModelConfig& cfg, std::uint64_t seed = 0);

std::size_t count_params(const Model& model);

/// Parameter count of the spectral kernels alone.
std::size_t spectral_param_count(const Model& model);

}  // namespace socfno
