#include "socfno/layers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace socfno {

namespace {

using RMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RMatrix>;
using Map = Eigen::Map<RMatrix>;

ConstMap as_matrix(const Tensor& t, std::size_t rows) {
    return {t.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t.size() / rows)};
}

Map as_matrix(Tensor& t, std::size_t rows) {
    return {t.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t.size() / rows)};
}

}  // namespace

std::string to_string(Norm norm) { return norm == Norm::Instance ? "instance" : "none"; }

std::string to_string(Activation activation) {
    switch (activation) {
        case Activation::ReLU:
            return "relu";
        case Activation::GELU:
            return "gelu";
        case Activation::Identity:
            return "identity";
    }
    return "identity";
}

Norm parse_norm(const std::string& name) {
    if (name == "instance") return Norm::Instance;
    if (name == "none") return Norm::None;
    throw InvalidArgument("unknown normalization '" + name + "' (expected instance|none)");
}

Activation parse_activation(const std::string& name) {
    if (name == "relu") return Activation::ReLU;
    if (name == "gelu") return Activation::GELU;
    if (name == "identity") return Activation::Identity;
    throw InvalidArgument("unknown activation '" + name + "' (expected relu|gelu|identity)");
}

Tensor pointwise_forward(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    if (x.rank() != 3 || weight.rank() != 2 || x.dim(0) != weight.dim(1))
        throw InvalidArgument("pointwise: input " + shape_string(x.shape()) + " incompatible with weight " +
                              shape_string(weight.shape()));
    if (bias.size() != weight.dim(0)) throw InvalidArgument("pointwise: bias length mismatch");
    const std::size_t out_c = weight.dim(0);
    Tensor y({out_c, x.dim(1), x.dim(2)});
    auto ym = as_matrix(y, out_c);
    ym.noalias() = as_matrix(weight, out_c) * as_matrix(x, x.dim(0));
    for (std::size_t o = 0; o < out_c; ++o) ym.row(static_cast<Eigen::Index>(o)).array() += bias[o];
    return y;
}

PointwiseGrads pointwise_backward(const Tensor& x, const Tensor& weight, const Tensor& upstream) {
    const std::size_t out_c = weight.dim(0), in_c = weight.dim(1);
    if (upstream.rank() != 3 || upstream.dim(0) != out_c || upstream.dim(1) != x.dim(1) ||
        upstream.dim(2) != x.dim(2))
        throw InvalidArgument("pointwise_backward: upstream shape mismatch");
    PointwiseGrads g{Tensor(x.shape()), Tensor(weight.shape()), Tensor({out_c})};
    const auto gm = as_matrix(upstream, out_c);
    as_matrix(g.weight, out_c).noalias() = gm * as_matrix(x, in_c).transpose();
    as_matrix(g.input, in_c).noalias() = as_matrix(weight, out_c).transpose() * gm;
    for (std::size_t o = 0; o < out_c; ++o) g.bias[o] = gm.row(static_cast<Eigen::Index>(o)).sum();
    return g;
}

void kaiming_uniform(Tensor& weight, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(weight.dim(1)));
    for (double& v : weight.values()) v = uniform(rng, -bound, bound);
}

Tensor instance_norm(const Tensor& x, double eps, InstanceNormCache* cache) {
    if (x.rank() != 3) throw InvalidArgument("instance_norm: input must be [C,H,W]");
    const std::size_t channels = x.dim(0), plane = x.dim(1) * x.dim(2);
    Tensor y(x.shape());
    std::vector<double> inv_std(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        const double* in = x.channel(c);
        double mean = 0.0;
        for (std::size_t p = 0; p < plane; ++p) mean += in[p];
        mean /= static_cast<double>(plane);
        double var = 0.0;
        for (std::size_t p = 0; p < plane; ++p) var += (in[p] - mean) * (in[p] - mean);
        var /= static_cast<double>(plane);
        inv_std[c] = 1.0 / std::sqrt(var + eps);
        double* out = y.channel(c);
        for (std::size_t p = 0; p < plane; ++p) out[p] = (in[p] - mean) * inv_std[c];
    }
    if (cache) {
        cache->normalized = y;
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

Tensor instance_norm_backward(const Tensor& upstream, const InstanceNormCache& cache) {
    const Tensor& y = cache.normalized;
    if (upstream.shape() != y.shape()) throw InvalidArgument("instance_norm_backward: shape mismatch");
    const std::size_t channels = y.dim(0), plane = y.dim(1) * y.dim(2);
    const double n = static_cast<double>(plane);
    Tensor dx(y.shape());
    for (std::size_t c = 0; c < channels; ++c) {
        const double* g = upstream.channel(c);
        const double* yc = y.channel(c);
        double mean_g = 0.0, mean_gy = 0.0;
        for (std::size_t p = 0; p < plane; ++p) {
            mean_g += g[p];
            mean_gy += g[p] * yc[p];
        }
        mean_g /= n;
        mean_gy /= n;
        double* out = dx.channel(c);
        for (std::size_t p = 0; p < plane; ++p) out[p] = cache.inv_std[c] * (g[p] - mean_g - yc[p] * mean_gy);
    }
    return dx;
}

namespace {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + x * pdf;
}

}  // namespace

Tensor activate(const Tensor& x, Activation activation) {
    Tensor y = x;
    switch (activation) {
        case Activation::ReLU:
            for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
            break;
        case Activation::GELU:
            for (double& v : y.values()) v = gelu(v);
            break;
        case Activation::Identity:
            break;
    }
    return y;
}

Tensor activate_backward(const Tensor& pre, const Tensor& upstream, Activation activation) {
    Tensor g = upstream;
    switch (activation) {
        case Activation::ReLU:
            for (std::size_t i = 0; i < g.size(); ++i)
                if (!(pre[i] > 0.0)) g[i] = 0.0;
            break;
        case Activation::GELU:
            for (std::size_t i = 0; i < g.size(); ++i) g[i] *= gelu_grad(pre[i]);
            break;
        case Activation::Identity:
            break;
    }
    return g;
}

FourierLayer make_fourier_layer(std::size_t in_channels, std::size_t out_channels, SpectralWeights spectral,
                                Norm norm, Activation activation) {
    if (spectral.in_channels != in_channels || spectral.out_channels != out_channels)
        throw InvalidArgument("make_fourier_layer: spectral weight widths do not match the layer");
    FourierLayer layer;
    layer.weight = Tensor({out_channels, in_channels});
    layer.bias = Tensor({out_channels});
    layer.spectral = std::move(spectral);
    layer.norm = norm;
    layer.activation = activation;
    return layer;
}

Tensor fourier_layer_forward(const Tensor& v, const FourierLayer& layer, FourierLayerCache* cache) {
    if (v.rank() != 3 || v.dim(0) != layer.in_channels())
        throw InvalidArgument("fourier_layer: input " + shape_string(v.shape()) + " does not have " +
                              std::to_string(layer.in_channels()) + " channels");
    Tensor z = pointwise_forward(v, layer.weight, layer.bias);
    z += spectral_conv(v, layer.spectral, cache ? &cache->spectral : nullptr);
    if (layer.norm == Norm::Instance) z = instance_norm(z, kInstanceNormEps, cache ? &cache->norm : nullptr);
    if (cache) {
        cache->input = v;
        cache->pre_activation = z;
    }
    return activate(z, layer.activation);
}

FourierLayerGrads fourier_layer_backward(const Tensor& upstream, const FourierLayer& layer,
                                         const FourierLayerCache& cache) {
    Tensor g = activate_backward(cache.pre_activation, upstream, layer.activation);
    if (layer.norm == Norm::Instance) g = instance_norm_backward(g, cache.norm);
    PointwiseGrads pw = pointwise_backward(cache.input, layer.weight, g);
    SpectralGrads sp = spectral_conv_backward(g, layer.spectral, cache.spectral);
    pw.input += sp.input;
    return {std::move(pw.input), std::move(pw.weight), std::move(pw.bias), std::move(sp.weights)};
}

}  // namespace socfno
