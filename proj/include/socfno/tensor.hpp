#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace socfno {

using Shape = std::vector<std::size_t>;
using Complex = std::complex<double>;

// Error kinds shared by every module.

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of 64-bit reals.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::vector<double>& values() noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Rank-3 [C,H,W] accessors.
    double& at(std::size_t c, std::size_t h, std::size_t w) { return data_[(c * shape_[1] + h) * shape_[2] + w]; }
    double at(std::size_t c, std::size_t h, std::size_t w) const {
        return data_[(c * shape_[1] + h) * shape_[2] + w];
    }

    /// Pointer to the start of channel c of a [C,H,W] tensor.
    double* channel(std::size_t c) { return data_.data() + c * shape_[1] * shape_[2]; }
    const double* channel(std::size_t c) const { return data_.data() + c * shape_[1] * shape_[2]; }

    Tensor reshaped(Shape shape) const;
    void fill(double value);
    bool all_finite() const;
    double max_abs() const;
    double sum() const;

    Tensor& operator+=(const Tensor& other);
    Tensor& operator-=(const Tensor& other);
    Tensor& operator*=(double scale);

    static Tensor uniform(Shape shape, double lo, double hi, std::mt19937_64& rng);
    static Tensor normal(Shape shape, double stddev, std::mt19937_64& rng);

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

Tensor operator+(Tensor lhs, const Tensor& rhs);
Tensor operator-(Tensor lhs, const Tensor& rhs);
Tensor operator*(Tensor lhs, double scale);
double dot(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);

/// Dense row-major array of complex values stored as interleaved (re, im) pairs.
class ComplexTensor {
public:
    ComplexTensor() = default;
    explicit ComplexTensor(Shape shape, Complex fill = {});

    const Shape& shape() const noexcept { return shape_; }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<Complex> data() noexcept { return data_; }
    std::span<const Complex> data() const noexcept { return data_; }

    Complex& operator[](std::size_t i) { return data_[i]; }
    const Complex& operator[](std::size_t i) const { return data_[i]; }

    Complex& at(std::size_t c, std::size_t k1, std::size_t k2) { return data_[(c * shape_[1] + k1) * shape_[2] + k2]; }
    const Complex& at(std::size_t c, std::size_t k1, std::size_t k2) const {
        return data_[(c * shape_[1] + k1) * shape_[2] + k2];
    }

private:
    Shape shape_;
    std::vector<Complex> data_;
};

/// Named handle into a parameter registry. The registry owner keeps the tensor alive.
struct ParameterRef {
    std::string name;
    Tensor* value = nullptr;
};

/// Stack [C_i,H,W] tensors along the channel axis.
Tensor concat_channels(std::span<const Tensor> xs);
Tensor concat_channels(std::initializer_list<Tensor> xs);

/// Adjoint of concat_channels: split an upstream [sum C_i,H,W] gradient into
/// per-input channel blocks.
std::vector<Tensor> split_channels(const Tensor& upstream, std::span<const std::size_t> channels);

/// Copy channels [begin, begin + count) of a [C,H,W] tensor.
Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t count);

/// Counter-based seed derivation (splitmix64), for independent random substreams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Portable draws from mt19937_64. The std distributions are implementation
// defined, which would break cross-platform reproducibility.
double uniform01(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double lo, double hi);
double standard_normal(std::mt19937_64& rng);
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

/// Fisher-Yates shuffle driven by uniform_index.
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

}  // namespace socfno
