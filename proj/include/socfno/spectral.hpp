#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "socfno/tensor.hpp"

namespace socfno {

/// Retained Fourier modes of an H x W grid's half spectrum [H, W/2+1]:
/// k2 in [0, N) and k1 in [0, N) or [H-N, H), clipped to the grid.
struct ModeMask {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t half = 0;
    std::vector<std::uint8_t> retained;  // [height, half], row-major
    std::size_t count = 0;

    bool at(std::size_t k1, std::size_t k2) const { return retained[k1 * half + k2] != 0; }
    /// Retained (k1, k2) pairs in row-major order.
    std::vector<std::pair<std::size_t, std::size_t>> modes() const;
};

ModeMask mode_mask(std::size_t height, std::size_t width, std::size_t modes);

enum class SpectralForm {
    Shared,          ///< one complex [C_out, C_in] matrix for every retained mode
    PerMode,         ///< one matrix per retained mode, [2N, N, C_out, C_in]
    PerModeFullGrid  ///< one matrix per half-spectrum bin of a fixed grid, [H, W/2+1, C_out, C_in]
};

/// Learnable complex kernel of a spectral convolution. Complex entries are
/// stored as a trailing (re, im) axis so they live in the real parameter
/// registry and count as two scalars each.
struct SpectralWeights {
    SpectralForm form = SpectralForm::Shared;
    std::size_t modes = 0;
    std::size_t out_channels = 0;
    std::size_t in_channels = 0;
    std::size_t grid_height = 0;  // PerModeFullGrid only
    std::size_t grid_width = 0;
    Tensor values;

    static SpectralWeights shared(std::size_t out_channels, std::size_t in_channels, std::size_t modes);
    static SpectralWeights per_mode(std::size_t out_channels, std::size_t in_channels, std::size_t modes);
    static SpectralWeights full_grid(std::size_t out_channels, std::size_t in_channels, std::size_t height,
                                     std::size_t width);

    /// Shape of the values tensor for a given form.
    static Shape value_shape(SpectralForm form, std::size_t out_channels, std::size_t in_channels, std::size_t modes,
                             std::size_t grid_height = 0, std::size_t grid_width = 0);

    /// Number of kernel matrices (1 for Shared).
    std::size_t matrix_count() const;
    std::size_t parameter_count() const { return values.size(); }

    Complex coefficient(std::size_t matrix, std::size_t out, std::size_t in) const;
    void set_coefficient(std::size_t matrix, std::size_t out, std::size_t in, Complex value);

    /// Uniform real and imaginary parts in +-sqrt(1 / (C_in * retained modes)).
    void initialize(std::mt19937_64& rng);
};

std::size_t spectral_parameter_count(SpectralForm form, std::size_t out_channels, std::size_t in_channels,
                                     std::size_t modes, std::size_t grid_height = 0, std::size_t grid_width = 0);

/// Saved state from spectral_conv needed by its backward pass.
struct SpectralCache {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::pair<std::size_t, std::size_t>> modes;
    std::vector<Complex> input_modes;  // [C_in, modes.size()]
};

/// F^-1(R . F v) with every non-retained mode zeroed.
Tensor spectral_conv(const Tensor& v, const SpectralWeights& weights, SpectralCache* cache = nullptr);

struct SpectralGrads {
    Tensor input;
    Tensor weights;  // same shape as SpectralWeights::values
};

SpectralGrads spectral_conv_backward(const Tensor& upstream, const SpectralWeights& weights,
                                     const SpectralCache& cache);

/// Half spectrum of spectral_conv's output after projecting the self-paired
/// columns (DC, Nyquist) onto Hermitian symmetry. irfft2 of this spectrum is
/// spectral_conv(v, weights).
ComplexTensor spectral_conv_spectrum(const Tensor& v, const SpectralWeights& weights);

}  // namespace socfno
