#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "socfno/tensor.hpp"

namespace socfno {

/// One-dimensional complex FFT of a fixed length. Powers of two use an
/// iterative radix-2 kernel; every other length goes through Bluestein's
/// chirp-z transform on a power-of-two grid.
class FftPlan {
public:
    explicit FftPlan(std::size_t n);

    std::size_t size() const noexcept { return n_; }

    /// In-place unnormalized transform. inverse=true uses e^{+i...}.
    void transform(std::span<Complex> data, bool inverse) const;

    /// Shared, thread-safe cache of plans keyed by length.
    static std::shared_ptr<const FftPlan> get(std::size_t n);

private:
    void radix2(std::span<Complex> data, bool inverse) const;
    void bluestein(std::span<Complex> data, bool inverse) const;

    std::size_t n_;
    bool pow2_;
    std::vector<Complex> twiddles_;     // radix-2: e^{-2 pi i k / n}, k < n/2
    std::vector<std::size_t> bitrev_;
    // Bluestein state.
    std::size_t m_ = 0;
    std::vector<Complex> chirp_;        // e^{-i pi k^2 / n}
    std::vector<Complex> chirp_fft_;    // FFT of conj(chirp) arranged circularly on m
    std::shared_ptr<const FftPlan> inner_;
};

/// Number of stored columns of a real 2D spectrum of width w.
constexpr std::size_t half_width(std::size_t w) { return w / 2 + 1; }

/// Hermitian multiplicity of half-spectrum column k2: 1 for the DC column and
/// (even w) the Nyquist column, 2 for interior columns.
double hermitian_weight(std::size_t k2, std::size_t w);

/// Unnormalized 2D DFT of each channel of a real [C,H,W] tensor, keeping
/// the nonnegative second-axis frequencies: [C,H,W/2+1].
ComplexTensor rfft2(const Tensor& x);

/// Inverse of rfft2 with 1/(H*W) normalization. Imaginary parts of the DC and
/// Nyquist columns are ignored, i.e. the spectrum is read through its
/// Hermitian projection.
Tensor irfft2(const ComplexTensor& s, std::size_t out_width);

/// Adjoint of rfft2 for reverse mode. grad holds dL/dRe + i dL/dIm per bin.
Tensor rfft2_backward(const ComplexTensor& grad, std::size_t out_width);

/// Adjoint of irfft2 for reverse mode: spectrum gradient of a real upstream.
ComplexTensor irfft2_backward(const Tensor& grad);

namespace detail {

/// rfft2 restricted to second-axis columns k2 < column_limit; columns at or
/// beyond the limit are left zero.
ComplexTensor rfft2_columns(const Tensor& x, std::size_t column_limit);

/// irfft2 assuming every column k2 >= column_limit of s is zero.
Tensor irfft2_columns(const ComplexTensor& s, std::size_t out_width, std::size_t column_limit);

}  // namespace detail

}  // namespace socfno
