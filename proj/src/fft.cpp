#include "socfno/fft.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace socfno {

namespace {

Complex unit_phase(double angle) { return {std::cos(angle), std::sin(angle)}; }

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n), pow2_(std::has_single_bit(n)) {
    if (n == 0) throw InvalidArgument("FftPlan: length must be positive");
    if (pow2_) {
        twiddles_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k)
            twiddles_[k] = unit_phase(-2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
        bitrev_.resize(n);
        const int bits = std::countr_zero(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (int b = 0; b < bits; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
            bitrev_[i] = r;
        }
        return;
    }
    m_ = std::bit_ceil(2 * n - 1);
    inner_ = get(m_);
    chirp_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the phase argument small and exact.
        const std::size_t k2 = (k * k) % (2 * n);
        chirp_[k] = unit_phase(-std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n));
    }
    chirp_fft_.assign(m_, Complex{});
    chirp_fft_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n; ++k) {
        chirp_fft_[k] = std::conj(chirp_[k]);
        chirp_fft_[m_ - k] = std::conj(chirp_[k]);
    }
    inner_->transform(chirp_fft_, false);
}

void FftPlan::transform(std::span<Complex> data, bool inverse) const {
    if (data.size() != n_)
        throw InvalidArgument("FftPlan: buffer length " + std::to_string(data.size()) + " != plan length " +
                              std::to_string(n_));
    if (n_ == 1) return;
    if (pow2_)
        radix2(data, inverse);
    else
        bluestein(data, inverse);
}

void FftPlan::radix2(std::span<Complex> data, bool inverse) const {
    for (std::size_t i = 0; i < n_; ++i)
        if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t j = 0; j < half; ++j) {
                const Complex w = inverse ? std::conj(twiddles_[j * stride]) : twiddles_[j * stride];
                const Complex u = data[start + j];
                const Complex v = data[start + j + half] * w;
                data[start + j] = u + v;
                data[start + j + half] = u - v;
            }
        }
    }
}

void FftPlan::bluestein(std::span<Complex> data, bool inverse) const {
    // The inverse transform is conj(F(conj(x))).
    std::vector<Complex> work(m_, Complex{});
    for (std::size_t k = 0; k < n_; ++k) {
        const Complex x = inverse ? std::conj(data[k]) : data[k];
        work[k] = x * chirp_[k];
    }
    inner_->transform(work, false);
    for (std::size_t k = 0; k < m_; ++k) work[k] *= chirp_fft_[k];
    inner_->transform(work, true);
    const double scale = 1.0 / static_cast<double>(m_);
    for (std::size_t k = 0; k < n_; ++k) {
        const Complex y = work[k] * chirp_[k] * scale;
        data[k] = inverse ? std::conj(y) : y;
    }
}

std::shared_ptr<const FftPlan> FftPlan::get(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(n); it != cache.end()) return it->second;
    }
    // Built outside the lock: Bluestein plans recurse into get().
    auto plan = std::make_shared<const FftPlan>(n);
    std::lock_guard lock(mutex);
    return cache.emplace(n, std::move(plan)).first->second;
}

double hermitian_weight(std::size_t k2, std::size_t w) {
    if (k2 == 0) return 1.0;
    if (w % 2 == 0 && k2 == w / 2) return 1.0;
    return 2.0;
}

namespace {

void require_image(const Tensor& x, const char* op) {
    if (x.empty() || x.rank() != 3) throw InvalidArgument(std::string(op) + ": expected a non-empty [C,H,W] tensor");
}

}  // namespace

namespace detail {

ComplexTensor rfft2_columns(const Tensor& x, std::size_t column_limit) {
    require_image(x, "rfft2");
    const std::size_t channels = x.dim(0), height = x.dim(1), width = x.dim(2);
    const std::size_t wh = half_width(width);
    const std::size_t limit = std::min(column_limit, wh);
    const auto row_plan = FftPlan::get(width);
    const auto col_plan = FftPlan::get(height);

    ComplexTensor out({channels, height, wh});
    std::vector<Complex> row(width), col(height);
    const std::size_t total_rows = channels * height;
    // Two real rows share one complex transform: z = a + i b.
    for (std::size_t r = 0; r < total_rows; r += 2) {
        const double* a = x.data().data() + r * width;
        const double* b = (r + 1 < total_rows) ? a + width : nullptr;
        for (std::size_t j = 0; j < width; ++j) row[j] = {a[j], b ? b[j] : 0.0};
        row_plan->transform(row, false);
        Complex* out_a = out.data().data() + r * wh;
        Complex* out_b = b ? out_a + wh : nullptr;
        for (std::size_t k = 0; k < limit; ++k) {
            const Complex zk = row[k];
            const Complex zn = std::conj(row[(width - k) % width]);
            out_a[k] = 0.5 * (zk + zn);
            if (out_b) out_b[k] = Complex(0.0, -0.5) * (zk - zn);
        }
    }
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t k2 = 0; k2 < limit; ++k2) {
            for (std::size_t h = 0; h < height; ++h) col[h] = out.at(c, h, k2);
            col_plan->transform(col, false);
            for (std::size_t h = 0; h < height; ++h) out.at(c, h, k2) = col[h];
        }
    }
    return out;
}

Tensor irfft2_columns(const ComplexTensor& s, std::size_t out_width, std::size_t column_limit) {
    if (s.shape().size() != 3 || s.size() == 0) throw InvalidArgument("irfft2: expected a non-empty [C,H,K] spectrum");
    const std::size_t channels = s.dim(0), height = s.dim(1), wh = s.dim(2);
    if (out_width == 0 || half_width(out_width) != wh)
        throw InvalidArgument("irfft2: output width " + std::to_string(out_width) +
                              " is inconsistent with spectrum width " + std::to_string(wh));
    const std::size_t width = out_width;
    const std::size_t limit = std::min(column_limit, wh);
    const auto row_plan = FftPlan::get(width);
    const auto col_plan = FftPlan::get(height);

    // Column pass into a scratch copy.
    std::vector<Complex> mixed(channels * height * wh, Complex{});
    std::vector<Complex> col(height);
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t k2 = 0; k2 < limit; ++k2) {
            for (std::size_t h = 0; h < height; ++h) col[h] = s.at(c, h, k2);
            col_plan->transform(col, true);
            for (std::size_t h = 0; h < height; ++h) mixed[(c * height + h) * wh + k2] = col[h];
        }
    }

    Tensor out({channels, height, width});
    const double scale = 1.0 / static_cast<double>(height * width);
    const std::size_t total_rows = channels * height;
    std::vector<Complex> ext_a(width), ext_b(width), row(width);
    auto extend = [&](const Complex* half, std::vector<Complex>& ext) {
        std::fill(ext.begin(), ext.end(), Complex{});
        ext[0] = half[0].real();
        for (std::size_t k = 1; k < limit; ++k) {
            if (2 * k == width) {
                ext[k] = half[k].real();
            } else {
                ext[k] = half[k];
                ext[width - k] = std::conj(half[k]);
            }
        }
    };
    for (std::size_t r = 0; r < total_rows; r += 2) {
        const bool pair = r + 1 < total_rows;
        extend(mixed.data() + r * wh, ext_a);
        if (pair)
            extend(mixed.data() + (r + 1) * wh, ext_b);
        else
            std::fill(ext_b.begin(), ext_b.end(), Complex{});
        // Hermitian rows invert to real signals, so two fit in one transform.
        for (std::size_t j = 0; j < width; ++j) row[j] = ext_a[j] + Complex(0.0, 1.0) * ext_b[j];
        row_plan->transform(row, true);
        double* out_a = out.data().data() + r * width;
        for (std::size_t j = 0; j < width; ++j) out_a[j] = row[j].real() * scale;
        if (pair) {
            double* out_b = out_a + width;
            for (std::size_t j = 0; j < width; ++j) out_b[j] = row[j].imag() * scale;
        }
    }
    return out;
}

}  // namespace detail

ComplexTensor rfft2(const Tensor& x) {
    require_image(x, "rfft2");
    return detail::rfft2_columns(x, half_width(x.dim(2)));
}

Tensor irfft2(const ComplexTensor& s, std::size_t out_width) {
    return detail::irfft2_columns(s, out_width, s.shape().size() == 3 ? s.dim(2) : 0);
}

Tensor rfft2_backward(const ComplexTensor& grad, std::size_t out_width) {
    if (grad.shape().size() != 3) throw InvalidArgument("rfft2_backward: expected a [C,H,K] gradient");
    ComplexTensor scaled = grad;
    const std::size_t wh = grad.dim(2);
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] /= hermitian_weight(i % wh, out_width);
    Tensor out = irfft2(scaled, out_width);
    out *= static_cast<double>(grad.dim(1) * out_width);
    return out;
}

ComplexTensor irfft2_backward(const Tensor& grad) {
    ComplexTensor s = rfft2(grad);
    const std::size_t width = grad.dim(2), wh = half_width(width);
    const double scale = 1.0 / static_cast<double>(grad.dim(1) * width);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= hermitian_weight(i % wh, width) * scale;
    return s;
}

}  // namespace socfno
