#include "socfno/model.hpp"

namespace socfno {

ModelConfig ModelConfig::fno_densenet() {
    ModelConfig cfg;
    cfg.hidden_channels = 24;
    cfg.dense = true;
    cfg.shared_r = true;
    return cfg;
}

ModelConfig ModelConfig::fno() {
    ModelConfig cfg;
    cfg.hidden_channels = 32;
    cfg.dense = false;
    cfg.shared_r = false;
    return cfg;
}

void ModelConfig::validate() const {
    if (in_channels == 0 || out_channels == 0 || hidden_channels == 0 || n_fourier_layers == 0 || modes == 0)
        throw InvalidArgument("ModelConfig: all extents must be positive");
    if ((full_grid_height == 0) != (full_grid_width == 0))
        throw InvalidArgument("ModelConfig: full-grid height and width must be set together");
    if (full_grid_height != 0 && shared_r)
        throw InvalidArgument("ModelConfig: a full-grid kernel is per-mode; set shared_r = false");
}

SpectralForm ModelConfig::spectral_form() const {
    if (shared_r) return SpectralForm::Shared;
    return full_grid_height != 0 ? SpectralForm::PerModeFullGrid : SpectralForm::PerMode;
}

std::vector<std::size_t> ModelConfig::layer_input_widths() const {
    std::vector<std::size_t> widths(n_fourier_layers, hidden_channels);
    if (dense)
        for (std::size_t t = 0; t < n_fourier_layers; ++t) widths[t] = hidden_channels * (t + 1);
    return widths;
}

std::size_t ModelConfig::projection_input_width() const {
    return dense ? hidden_channels * (n_fourier_layers + 1) : hidden_channels;
}

nlohmann::json to_json(const ModelConfig& cfg) {
    return {{"in_channels", cfg.in_channels},
            {"out_channels", cfg.out_channels},
            {"hidden_channels", cfg.hidden_channels},
            {"n_fourier_layers", cfg.n_fourier_layers},
            {"modes", cfg.modes},
            {"dense", cfg.dense},
            {"shared_r", cfg.shared_r},
            {"full_grid_height", cfg.full_grid_height},
            {"full_grid_width", cfg.full_grid_width},
            {"norm", to_string(cfg.norm)},
            {"activation", to_string(cfg.activation)}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.in_channels = j.value("in_channels", cfg.in_channels);
    cfg.out_channels = j.value("out_channels", cfg.out_channels);
    cfg.hidden_channels = j.value("hidden_channels", cfg.hidden_channels);
    cfg.n_fourier_layers = j.value("n_fourier_layers", cfg.n_fourier_layers);
    cfg.modes = j.value("modes", cfg.modes);
    cfg.dense = j.value("dense", cfg.dense);
    cfg.shared_r = j.value("shared_r", cfg.shared_r);
    cfg.full_grid_height = j.value("full_grid_height", cfg.full_grid_height);
    cfg.full_grid_width = j.value("full_grid_width", cfg.full_grid_width);
    cfg.norm = parse_norm(j.value("norm", to_string(cfg.norm)));
    cfg.activation = parse_activation(j.value("activation", to_string(cfg.activation)));
    cfg.validate();
    return cfg;
}

Model::Model(ModelConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    const std::size_t hidden = cfg_.hidden_channels;
    lifting_weight_ = Tensor({hidden, cfg_.in_channels});
    lifting_bias_ = Tensor({hidden});
    for (std::size_t width : cfg_.layer_input_widths()) {
        SpectralWeights spectral;
        switch (cfg_.spectral_form()) {
            case SpectralForm::Shared:
                spectral = SpectralWeights::shared(hidden, width, cfg_.modes);
                break;
            case SpectralForm::PerMode:
                spectral = SpectralWeights::per_mode(hidden, width, cfg_.modes);
                break;
            case SpectralForm::PerModeFullGrid:
                spectral = SpectralWeights::full_grid(hidden, width, cfg_.full_grid_height, cfg_.full_grid_width);
                break;
        }
        layers_.push_back(make_fourier_layer(width, hidden, std::move(spectral), cfg_.norm, cfg_.activation));
    }
    projection_weight_ = Tensor({cfg_.out_channels, cfg_.projection_input_width()});
    projection_bias_ = Tensor({cfg_.out_channels});
}

std::vector<ParameterRef> Model::parameters() {
    std::vector<ParameterRef> refs;
    refs.push_back({"lifting.weight", &lifting_weight_});
    refs.push_back({"lifting.bias", &lifting_bias_});
    for (std::size_t t = 0; t < layers_.size(); ++t) {
        const std::string prefix = "layers." + std::to_string(t) + ".";
        refs.push_back({prefix + "weight", &layers_[t].weight});
        refs.push_back({prefix + "bias", &layers_[t].bias});
        refs.push_back({prefix + "spectral", &layers_[t].spectral.values});
    }
    refs.push_back({"projection.weight", &projection_weight_});
    refs.push_back({"projection.bias", &projection_bias_});
    return refs;
}

std::vector<std::pair<std::string, const Tensor*>> Model::parameters() const {
    std::vector<std::pair<std::string, const Tensor*>> out;
    out.emplace_back("lifting.weight", &lifting_weight_);
    out.emplace_back("lifting.bias", &lifting_bias_);
    for (std::size_t t = 0; t < layers_.size(); ++t) {
        const std::string prefix = "layers." + std::to_string(t) + ".";
        out.emplace_back(prefix + "weight", &layers_[t].weight);
        out.emplace_back(prefix + "bias", &layers_[t].bias);
        out.emplace_back(prefix + "spectral", &layers_[t].spectral.values);
    }
    out.emplace_back("projection.weight", &projection_weight_);
    out.emplace_back("projection.bias", &projection_bias_);
    return out;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, value] : parameters()) n += value->size();
    return n;
}

void Model::initialize(std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 0x1f));
    kaiming_uniform(lifting_weight_, rng);
    lifting_bias_.fill(0.0);
    for (auto& layer : layers_) {
        kaiming_uniform(layer.weight, rng);
        layer.bias.fill(0.0);
        layer.spectral.initialize(rng);
    }
    kaiming_uniform(projection_weight_, rng);
    projection_bias_.fill(0.0);
}

void Model::round_to_float32() {
    for (auto& ref : parameters())
        for (double& v : ref.value->values()) v = static_cast<double>(static_cast<float>(v));
}

void Model::check_input(const Tensor& x) const {
    if (x.rank() != 3 || x.dim(0) != cfg_.in_channels)
        throw InvalidArgument("model forward: expected [" + std::to_string(cfg_.in_channels) + ",H,W] input, got " +
                              shape_string(x.shape()));
    if (cfg_.spectral_form() == SpectralForm::PerModeFullGrid) {
        if (x.dim(1) != cfg_.full_grid_height || x.dim(2) != cfg_.full_grid_width)
            throw InvalidArgument("model forward: full-grid model requires " + std::to_string(cfg_.full_grid_height) +
                                  "x" + std::to_string(cfg_.full_grid_width) + " input");
        return;
    }
    if (x.dim(1) < 2 * cfg_.modes || x.dim(2) < 2 * cfg_.modes)
        throw InvalidArgument("model forward: spatial extent " + std::to_string(x.dim(1)) + "x" +
                              std::to_string(x.dim(2)) + " is smaller than 2N = " + std::to_string(2 * cfg_.modes));
}

Tensor Model::forward(const Tensor& x) const {
    ModelTrace trace;
    return forward(x, trace);
}

Tensor Model::forward(const Tensor& x, ModelTrace& trace) const {
    check_input(x);
    trace.input = x;
    trace.lifted = pointwise_forward(x, lifting_weight_, lifting_bias_);
    trace.layers.assign(layers_.size(), {});
    trace.outputs.clear();

    std::vector<Tensor> blocks{trace.lifted};
    for (std::size_t t = 0; t < layers_.size(); ++t) {
        const Tensor input = cfg_.dense ? concat_channels(std::span<const Tensor>(blocks)) : blocks.back();
        trace.outputs.push_back(fourier_layer_forward(input, layers_[t], &trace.layers[t]));
        if (cfg_.dense)
            blocks.push_back(trace.outputs.back());
        else
            blocks.back() = trace.outputs.back();
    }
    trace.features = cfg_.dense ? concat_channels(std::span<const Tensor>(blocks)) : blocks.back();
    return pointwise_forward(trace.features, projection_weight_, projection_bias_);
}

std::vector<Tensor> Model::backward(const ModelTrace& trace, const Tensor& upstream, Tensor* grad_input) const {
    const std::size_t n_layers = layers_.size();
    const std::size_t hidden = cfg_.hidden_channels;
    // Registry layout: lifting (2), 3 per layer, projection (2).
    std::vector<Tensor> grads(4 + 3 * n_layers);

    PointwiseGrads proj = pointwise_backward(trace.features, projection_weight_, upstream);
    grads[2 + 3 * n_layers] = std::move(proj.weight);
    grads[3 + 3 * n_layers] = std::move(proj.bias);

    // block 0 is the lifted input, block t the output of layer t.
    std::vector<Tensor> block_grads(n_layers + 1);
    if (cfg_.dense) {
        const std::vector<std::size_t> widths(n_layers + 1, hidden);
        block_grads = split_channels(proj.input, widths);
    } else {
        for (std::size_t t = 0; t < n_layers; ++t) block_grads[t] = Tensor(trace.lifted.shape());
        block_grads[n_layers] = std::move(proj.input);
    }

    for (std::size_t t = n_layers; t-- > 0;) {
        FourierLayerGrads lg = fourier_layer_backward(block_grads[t + 1], layers_[t], trace.layers[t]);
        grads[2 + 3 * t] = std::move(lg.weight);
        grads[3 + 3 * t] = std::move(lg.bias);
        grads[4 + 3 * t] = std::move(lg.spectral);
        if (cfg_.dense) {
            const std::vector<std::size_t> widths(t + 1, hidden);
            auto parts = split_channels(lg.input, widths);
            for (std::size_t b = 0; b <= t; ++b) block_grads[b] += parts[b];
        } else {
            block_grads[t] = std::move(lg.input);
        }
    }

    PointwiseGrads lift = pointwise_backward(trace.input, lifting_weight_, block_grads[0]);
    grads[0] = std::move(lift.weight);
    grads[1] = std::move(lift.bias);
    if (grad_input) *grad_input = std::move(lift.input);
    return grads;
}

Model build_model(const ModelConfig& cfg, std::uint64_t seed) {
    Model model(cfg);
    model.initialize(seed);
    return model;
}

std::size_t count_params(const Model& model) { return model.parameter_count(); }

std::size_t spectral_param_count(const Model& model) {
    std::size_t n = 0;
    for (const auto& layer : model.layers()) n += layer.spectral.parameter_count();
    return n;
}

}  // namespace socfno
