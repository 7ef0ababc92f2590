#include "socfno/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include "socfno/fft.hpp"

namespace socfno {

namespace {

using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t retained_per_mode(std::size_t modes) { return 2 * modes * modes; }

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> ModeMask::modes() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(count);
    for (std::size_t k1 = 0; k1 < height; ++k1)
        for (std::size_t k2 = 0; k2 < half; ++k2)
            if (at(k1, k2)) out.emplace_back(k1, k2);
    return out;
}

ModeMask mode_mask(std::size_t height, std::size_t width, std::size_t modes) {
    if (height == 0 || width == 0) throw InvalidArgument("mode_mask: grid extents must be positive");
    if (modes == 0) throw InvalidArgument("mode_mask: N must be at least 1");
    ModeMask mask;
    mask.height = height;
    mask.width = width;
    mask.half = half_width(width);
    mask.retained.assign(height * mask.half, 0);
    for (std::size_t k1 = 0; k1 < height; ++k1) {
        const bool row = k1 < modes || k1 + modes >= height;
        if (!row) continue;
        for (std::size_t k2 = 0; k2 < std::min(modes, mask.half); ++k2) {
            mask.retained[k1 * mask.half + k2] = 1;
            ++mask.count;
        }
    }
    return mask;
}

Shape SpectralWeights::value_shape(SpectralForm form, std::size_t out_channels, std::size_t in_channels,
                                   std::size_t modes, std::size_t grid_height, std::size_t grid_width) {
    switch (form) {
        case SpectralForm::Shared:
            return {out_channels, in_channels, 2};
        case SpectralForm::PerMode:
            return {2 * modes, modes, out_channels, in_channels, 2};
        case SpectralForm::PerModeFullGrid:
            return {grid_height, half_width(grid_width), out_channels, in_channels, 2};
    }
    throw InvalidArgument("unknown spectral form");
}

SpectralWeights SpectralWeights::shared(std::size_t out_channels, std::size_t in_channels, std::size_t modes) {
    if (modes == 0) throw InvalidArgument("SpectralWeights: N must be at least 1");
    SpectralWeights w;
    w.form = SpectralForm::Shared;
    w.modes = modes;
    w.out_channels = out_channels;
    w.in_channels = in_channels;
    w.values = Tensor(value_shape(w.form, out_channels, in_channels, modes));
    return w;
}

SpectralWeights SpectralWeights::per_mode(std::size_t out_channels, std::size_t in_channels, std::size_t modes) {
    if (modes == 0) throw InvalidArgument("SpectralWeights: N must be at least 1");
    SpectralWeights w;
    w.form = SpectralForm::PerMode;
    w.modes = modes;
    w.out_channels = out_channels;
    w.in_channels = in_channels;
    w.values = Tensor(value_shape(w.form, out_channels, in_channels, modes));
    return w;
}

SpectralWeights SpectralWeights::full_grid(std::size_t out_channels, std::size_t in_channels, std::size_t height,
                                           std::size_t width) {
    SpectralWeights w;
    w.form = SpectralForm::PerModeFullGrid;
    w.modes = std::max(height, half_width(width));
    w.out_channels = out_channels;
    w.in_channels = in_channels;
    w.grid_height = height;
    w.grid_width = width;
    w.values = Tensor(value_shape(w.form, out_channels, in_channels, w.modes, height, width));
    return w;
}

std::size_t SpectralWeights::matrix_count() const {
    switch (form) {
        case SpectralForm::Shared:
            return 1;
        case SpectralForm::PerMode:
            return retained_per_mode(modes);
        case SpectralForm::PerModeFullGrid:
            return grid_height * half_width(grid_width);
    }
    return 0;
}

Complex SpectralWeights::coefficient(std::size_t matrix, std::size_t out, std::size_t in) const {
    const std::size_t base = ((matrix * out_channels + out) * in_channels + in) * 2;
    return {values[base], values[base + 1]};
}

void SpectralWeights::set_coefficient(std::size_t matrix, std::size_t out, std::size_t in, Complex value) {
    const std::size_t base = ((matrix * out_channels + out) * in_channels + in) * 2;
    values[base] = value.real();
    values[base + 1] = value.imag();
}

void SpectralWeights::initialize(std::mt19937_64& rng) {
    const std::size_t retained = form == SpectralForm::PerModeFullGrid ? matrix_count() : retained_per_mode(modes);
    const double bound = std::sqrt(1.0 / static_cast<double>(in_channels * retained));
    for (double& v : values.values()) v = uniform(rng, -bound, bound);
}

std::size_t spectral_parameter_count(SpectralForm form, std::size_t out_channels, std::size_t in_channels,
                                     std::size_t modes, std::size_t grid_height, std::size_t grid_width) {
    return shape_size(SpectralWeights::value_shape(form, out_channels, in_channels, modes, grid_height, grid_width));
}

namespace {

struct Plan {
    std::vector<std::pair<std::size_t, std::size_t>> modes;
    std::vector<std::size_t> matrix;  // weight matrix index per mode
    std::size_t column_limit = 0;
};

Plan make_plan(std::size_t height, std::size_t width, const SpectralWeights& w) {
    const std::size_t wh = half_width(width);
    Plan plan;
    switch (w.form) {
        case SpectralForm::Shared:
            break;
        case SpectralForm::PerMode:
            if (2 * w.modes > height || w.modes > wh)
                throw InvalidArgument("spectral_conv: N=" + std::to_string(w.modes) + " exceeds the " +
                                      std::to_string(height) + "x" + std::to_string(width) +
                                      " spectrum for per-mode weights (need 2N <= H and N <= W/2+1)");
            break;
        case SpectralForm::PerModeFullGrid:
            if (height != w.grid_height || width != w.grid_width)
                throw InvalidArgument("spectral_conv: full-grid weights were built for " +
                                      std::to_string(w.grid_height) + "x" + std::to_string(w.grid_width) +
                                      ", got " + std::to_string(height) + "x" + std::to_string(width));
            break;
    }
    const ModeMask mask = mode_mask(height, width, w.modes);
    plan.modes = mask.modes();
    plan.column_limit = std::min(w.modes, wh);
    plan.matrix.reserve(plan.modes.size());
    for (auto [k1, k2] : plan.modes) {
        switch (w.form) {
            case SpectralForm::Shared:
                plan.matrix.push_back(0);
                break;
            case SpectralForm::PerMode: {
                const std::size_t i1 = k1 < w.modes ? k1 : k1 + 2 * w.modes - height;
                plan.matrix.push_back(i1 * w.modes + k2);
                break;
            }
            case SpectralForm::PerModeFullGrid:
                plan.matrix.push_back(k1 * wh + k2);
                break;
        }
    }
    return plan;
}

void check_input(const Tensor& v, const SpectralWeights& w) {
    if (v.rank() != 3) throw InvalidArgument("spectral_conv: input must be [C,H,W], got " + shape_string(v.shape()));
    if (v.dim(0) != w.in_channels)
        throw InvalidArgument("spectral_conv: input has " + std::to_string(v.dim(0)) + " channels, weights expect " +
                              std::to_string(w.in_channels));
}

CMatrix weight_matrix(const SpectralWeights& w, std::size_t matrix) {
    CMatrix r(w.out_channels, w.in_channels);
    for (std::size_t o = 0; o < w.out_channels; ++o)
        for (std::size_t i = 0; i < w.in_channels; ++i) r(o, i) = w.coefficient(matrix, o, i);
    return r;
}

// Output modes [C_out, m] from input modes [C_in, m].
CMatrix apply_kernel(const SpectralWeights& w, const Plan& plan, const CMatrix& x) {
    const auto m = static_cast<Eigen::Index>(plan.modes.size());
    if (w.form == SpectralForm::Shared) return weight_matrix(w, 0) * x;
    CMatrix y(w.out_channels, m);
    for (Eigen::Index j = 0; j < m; ++j) y.col(j) = weight_matrix(w, plan.matrix[j]) * x.col(j);
    return y;
}

ComplexTensor scatter(const CMatrix& y, const Plan& plan, std::size_t height, std::size_t width) {
    ComplexTensor s({static_cast<std::size_t>(y.rows()), height, half_width(width)});
    for (Eigen::Index c = 0; c < y.rows(); ++c)
        for (std::size_t j = 0; j < plan.modes.size(); ++j)
            s.at(c, plan.modes[j].first, plan.modes[j].second) = y(c, j);
    return s;
}

// Truncated 2D DFT restricted to a product set of retained modes
// (rows k1 in a list, columns k2 < K2), evaluated as dense matrix products.
// With few retained modes this is much cheaper than full transforms and gives
// the same rfft2 / irfft2 values at those modes.
class DftBasis {
public:
    DftBasis(std::size_t height, std::size_t width, std::vector<std::size_t> rows, std::size_t k2)
        : height_(height), width_(width), rows_(std::move(rows)), k2_(k2) {
        const auto k1 = static_cast<Eigen::Index>(rows_.size());
        const auto h = static_cast<Eigen::Index>(height), w = static_cast<Eigen::Index>(width);
        const auto kk = static_cast<Eigen::Index>(k2);
        const double two_pi = 2.0 * std::numbers::pi;
        const double inv_area = 1.0 / static_cast<double>(height * width);

        row_fwd_.resize(w, 2 * kk);
        row_inv_.resize(2 * kk, w);
        for (Eigen::Index j = 0; j < w; ++j)
            for (Eigen::Index k = 0; k < kk; ++k) {
                const double a = two_pi * static_cast<double>((static_cast<std::size_t>(j * k)) % width) /
                                 static_cast<double>(width);
                const double alpha = hermitian_weight(static_cast<std::size_t>(k), width) * inv_area;
                row_fwd_(j, k) = std::cos(a);
                row_fwd_(j, kk + k) = -std::sin(a);
                row_inv_(k, j) = alpha * std::cos(a);
                row_inv_(kk + k, j) = -alpha * std::sin(a);
            }
        col_fwd_.resize(2 * k1, h);
        col_inv_.resize(h, 2 * k1);
        for (Eigen::Index r = 0; r < k1; ++r)
            for (Eigen::Index i = 0; i < h; ++i) {
                const double a = two_pi * static_cast<double>((rows_[r] * static_cast<std::size_t>(i)) % height) /
                                 static_cast<double>(height);
                col_fwd_(r, i) = std::cos(a);
                col_fwd_(k1 + r, i) = -std::sin(a);
                col_inv_(i, r) = std::cos(a);
                col_inv_(i, k1 + r) = std::sin(a);
            }
    }

    static std::shared_ptr<const DftBasis> get(std::size_t height, std::size_t width,
                                               const std::vector<std::size_t>& rows, std::size_t k2) {
        using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::vector<std::size_t>>;
        static std::mutex mutex;
        static std::map<Key, std::shared_ptr<const DftBasis>> cache;
        Key key{height, width, k2, rows};
        std::lock_guard lock(mutex);
        auto& slot = cache[key];
        if (!slot) slot = std::make_shared<const DftBasis>(height, width, rows, k2);
        return slot;
    }

    /// rfft2(x) at the retained modes: [C, K1*K2], column r*K2 + k2.
    CMatrix forward(const Tensor& x) const {
        const auto c = static_cast<Eigen::Index>(x.dim(0));
        const auto h = static_cast<Eigen::Index>(height_), w = static_cast<Eigen::Index>(width_);
        const auto kk = static_cast<Eigen::Index>(k2_), k1 = static_cast<Eigen::Index>(rows_.size());
        const Eigen::Map<const RMatrix> xs(x.data().data(), c * h, w);
        const RMatrix rowspec = xs * row_fwd_;  // [C*H, 2*K2]
        // Complex products are done as real GEMMs on stacked re/im blocks;
        // column (2*ch + part)*K2 + k holds part (0 re, 1 im) of channel ch.
        RMatrix mixed(h, 2 * c * kk);
        for (Eigen::Index ch = 0; ch < c; ++ch)
            for (Eigen::Index i = 0; i < h; ++i)
                for (Eigen::Index k = 0; k < kk; ++k) {
                    mixed(i, 2 * ch * kk + k) = rowspec(ch * h + i, k);
                    mixed(i, (2 * ch + 1) * kk + k) = rowspec(ch * h + i, kk + k);
                }
        const RMatrix spec = col_fwd_ * mixed;  // [2*K1, 2*C*K2]
        CMatrix out(c, k1 * kk);
        for (Eigen::Index ch = 0; ch < c; ++ch)
            for (Eigen::Index r = 0; r < k1; ++r)
                for (Eigen::Index k = 0; k < kk; ++k) {
                    const Eigen::Index re = 2 * ch * kk + k, im = re + kk;
                    out(ch, r * kk + k) = Complex(spec(r, re) - spec(k1 + r, im), spec(r, im) + spec(k1 + r, re));
                }
        return out;
    }

    /// irfft2 of a half spectrum that is zero outside the retained modes.
    Tensor inverse(const CMatrix& s) const {
        const auto c = s.rows();
        const auto h = static_cast<Eigen::Index>(height_), w = static_cast<Eigen::Index>(width_);
        const auto kk = static_cast<Eigen::Index>(k2_), k1 = static_cast<Eigen::Index>(rows_.size());
        // [cos | sin] times [[re, im]; [-im, re]] gives [re | im] of the product.
        RMatrix spec(2 * k1, 2 * c * kk);
        for (Eigen::Index ch = 0; ch < c; ++ch)
            for (Eigen::Index r = 0; r < k1; ++r)
                for (Eigen::Index k = 0; k < kk; ++k) {
                    const Complex v = s(ch, r * kk + k);
                    const Eigen::Index re = 2 * ch * kk + k, im = re + kk;
                    spec(r, re) = v.real();
                    spec(r, im) = v.imag();
                    spec(k1 + r, re) = -v.imag();
                    spec(k1 + r, im) = v.real();
                }
        const RMatrix mixed = col_inv_ * spec;  // [H, 2*C*K2]
        RMatrix parts(c * h, 2 * kk);
        for (Eigen::Index ch = 0; ch < c; ++ch)
            for (Eigen::Index i = 0; i < h; ++i)
                for (Eigen::Index k = 0; k < kk; ++k) {
                    parts(ch * h + i, k) = mixed(i, 2 * ch * kk + k);
                    parts(ch * h + i, kk + k) = mixed(i, (2 * ch + 1) * kk + k);
                }
        Tensor out({static_cast<std::size_t>(c), height_, width_});
        Eigen::Map<RMatrix>(out.data().data(), c * h, w).noalias() = parts * row_inv_;
        return out;
    }

private:
    std::size_t height_, width_;
    std::vector<std::size_t> rows_;
    std::size_t k2_;
    RMatrix row_fwd_;  // [W, 2*K2]: cos | -sin
    RMatrix row_inv_;  // [2*K2, W]: weighted cos ; -sin, including 1/(H*W)
    RMatrix col_fwd_;  // [2*K1, H]: cos ; -sin
    RMatrix col_inv_;  // [H, 2*K1]: cos | sin
};

std::shared_ptr<const DftBasis> basis_for(const Plan& plan, std::size_t height, std::size_t width) {
    std::vector<std::size_t> rows;
    for (const auto& [k1, k2] : plan.modes)
        if (rows.empty() || rows.back() != k1) rows.push_back(k1);
    return DftBasis::get(height, width, rows, plan.column_limit);
}

ComplexTensor forward_spectrum(const Tensor& v, const SpectralWeights& w, const Plan& plan, SpectralCache* cache) {
    const std::size_t height = v.dim(1), width = v.dim(2);
    const CMatrix x = basis_for(plan, height, width)->forward(v);
    if (cache) {
        cache->height = height;
        cache->width = width;
        cache->modes = plan.modes;
        cache->input_modes.assign(x.data(), x.data() + x.size());
    }
    return scatter(apply_kernel(w, plan, x), plan, height, width);
}

}  // namespace

Tensor spectral_conv(const Tensor& v, const SpectralWeights& weights, SpectralCache* cache) {
    check_input(v, weights);
    const std::size_t height = v.dim(1), width = v.dim(2);
    const Plan plan = make_plan(height, width, weights);
    const auto basis = basis_for(plan, height, width);
    const CMatrix x = basis->forward(v);
    if (cache) {
        cache->height = height;
        cache->width = width;
        cache->modes = plan.modes;
        cache->input_modes.assign(x.data(), x.data() + x.size());
    }
    return basis->inverse(apply_kernel(weights, plan, x));
}

ComplexTensor spectral_conv_spectrum(const Tensor& v, const SpectralWeights& weights) {
    check_input(v, weights);
    const std::size_t height = v.dim(1), width = v.dim(2), wh = half_width(width);
    const Plan plan = make_plan(height, width, weights);
    ComplexTensor y = forward_spectrum(v, weights, plan, nullptr);
    std::vector<std::size_t> self_paired{0};
    if (width % 2 == 0 && width / 2 < wh) self_paired.push_back(width / 2);
    std::vector<Complex> column(height);
    for (std::size_t c = 0; c < y.dim(0); ++c) {
        for (auto k2 : self_paired) {
            for (std::size_t k1 = 0; k1 < height; ++k1) column[k1] = y.at(c, k1, k2);
            for (std::size_t k1 = 0; k1 < height; ++k1)
                y.at(c, k1, k2) = 0.5 * (column[k1] + std::conj(column[(height - k1) % height]));
        }
    }
    return y;
}

SpectralGrads spectral_conv_backward(const Tensor& upstream, const SpectralWeights& weights,
                                     const SpectralCache& cache) {
    const std::size_t height = cache.height, width = cache.width;
    if (upstream.rank() != 3 || upstream.dim(0) != weights.out_channels || upstream.dim(1) != height ||
        upstream.dim(2) != width)
        throw InvalidArgument("spectral_conv_backward: upstream shape " + shape_string(upstream.shape()) +
                              " does not match the forward output");
    const Plan plan = make_plan(height, width, weights);
    const auto m = static_cast<Eigen::Index>(plan.modes.size());
    const double inv_area = 1.0 / static_cast<double>(height * width);

    // Adjoint of irfft2 at the retained modes.
    const auto basis = basis_for(plan, height, width);
    CMatrix gy = basis->forward(upstream);
    for (Eigen::Index j = 0; j < m; ++j) gy.col(j) *= hermitian_weight(plan.modes[j].second, width) * inv_area;

    const Eigen::Map<const CMatrix> x(cache.input_modes.data(), static_cast<Eigen::Index>(weights.in_channels), m);

    SpectralGrads grads;
    grads.weights = Tensor(weights.values.shape());
    CMatrix gx(weights.in_channels, m);
    auto store = [&](std::size_t matrix, const CMatrix& g) {
        for (std::size_t o = 0; o < weights.out_channels; ++o)
            for (std::size_t i = 0; i < weights.in_channels; ++i) {
                const std::size_t base = ((matrix * weights.out_channels + o) * weights.in_channels + i) * 2;
                grads.weights[base] += g(o, i).real();
                grads.weights[base + 1] += g(o, i).imag();
            }
    };
    if (weights.form == SpectralForm::Shared) {
        const CMatrix r = weight_matrix(weights, 0);
        store(0, gy * x.adjoint());
        gx = r.adjoint() * gy;
    } else {
        for (Eigen::Index j = 0; j < m; ++j) {
            const CMatrix r = weight_matrix(weights, plan.matrix[j]);
            store(plan.matrix[j], gy.col(j) * x.col(j).adjoint());
            gx.col(j) = r.adjoint() * gy.col(j);
        }
    }

    // Adjoint of rfft2: H*W * irfft2(g / hermitian weight).
    for (Eigen::Index j = 0; j < m; ++j) gx.col(j) /= hermitian_weight(plan.modes[j].second, width);
    grads.input = basis->inverse(gx);
    grads.input *= static_cast<double>(height * width);
    return grads;
}

}  // namespace socfno
