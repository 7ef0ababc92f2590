#include "socfno/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace socfno {

std::size_t shape_size(const Shape& shape) {
    if (shape.empty()) return 0;
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

namespace {

void require_positive_extents(const Shape& shape) {
    for (auto e : shape)
        if (e == 0) throw InvalidArgument("tensor shape " + shape_string(shape) + " has a zero extent");
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw InvalidArgument(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                              shape_string(b.shape()));
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    require_positive_extents(shape_);
    data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    require_positive_extents(shape_);
    if (data_.size() != shape_size(shape_))
        throw InvalidArgument("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                              shape_string(shape_));
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_size(shape) != data_.size())
        throw InvalidArgument("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    return Tensor(std::move(shape), data_);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Tensor::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double Tensor::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

Tensor& Tensor::operator+=(const Tensor& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double scale) {
    for (double& v : data_) v *= scale;
    return *this;
}

Tensor Tensor::uniform(Shape shape, double lo, double hi, std::mt19937_64& rng) {
    Tensor t(std::move(shape));
    for (double& v : t.data_) v = socfno::uniform(rng, lo, hi);
    return t;
}

Tensor Tensor::normal(Shape shape, double stddev, std::mt19937_64& rng) {
    Tensor t(std::move(shape));
    for (double& v : t.data_) v = stddev * standard_normal(rng);
    return t;
}

Tensor operator+(Tensor lhs, const Tensor& rhs) { return lhs += rhs; }
Tensor operator-(Tensor lhs, const Tensor& rhs) { return lhs -= rhs; }
Tensor operator*(Tensor lhs, double scale) { return lhs *= scale; }

double dot(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

ComplexTensor::ComplexTensor(Shape shape, Complex fill) : shape_(std::move(shape)) {
    require_positive_extents(shape_);
    data_.assign(shape_size(shape_), fill);
}

Tensor concat_channels(std::span<const Tensor> xs) {
    if (xs.empty()) throw InvalidArgument("concat_channels: no inputs");
    const auto& first = xs.front();
    if (first.rank() != 3) throw InvalidArgument("concat_channels: inputs must be [C,H,W]");
    std::size_t channels = 0;
    for (const auto& x : xs) {
        if (x.rank() != 3 || x.dim(1) != first.dim(1) || x.dim(2) != first.dim(2))
            throw InvalidArgument("concat_channels: spatial mismatch " + shape_string(x.shape()) + " vs " +
                                  shape_string(first.shape()));
        channels += x.dim(0);
    }
    std::vector<double> out;
    out.reserve(channels * first.dim(1) * first.dim(2));
    for (const auto& x : xs) out.insert(out.end(), x.values().begin(), x.values().end());
    return Tensor({channels, first.dim(1), first.dim(2)}, std::move(out));
}

Tensor concat_channels(std::initializer_list<Tensor> xs) {
    return concat_channels(std::span<const Tensor>(xs.begin(), xs.size()));
}

std::vector<Tensor> split_channels(const Tensor& upstream, std::span<const std::size_t> channels) {
    const std::size_t total = std::accumulate(channels.begin(), channels.end(), std::size_t{0});
    if (upstream.rank() != 3 || upstream.dim(0) != total)
        throw InvalidArgument("split_channels: upstream " + shape_string(upstream.shape()) +
                              " does not match channel total " + std::to_string(total));
    std::vector<Tensor> parts;
    parts.reserve(channels.size());
    std::size_t begin = 0;
    for (auto c : channels) {
        parts.push_back(slice_channels(upstream, begin, c));
        begin += c;
    }
    return parts;
}

Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t count) {
    if (x.rank() != 3 || begin + count > x.dim(0) || count == 0)
        throw InvalidArgument("slice_channels: range out of bounds for " + shape_string(x.shape()));
    const std::size_t plane = x.dim(1) * x.dim(2);
    std::vector<double> out(x.values().begin() + static_cast<std::ptrdiff_t>(begin * plane),
                            x.values().begin() + static_cast<std::ptrdiff_t>((begin + count) * plane));
    return Tensor({count, x.dim(1), x.dim(2)}, std::move(out));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double standard_normal(std::mt19937_64& rng) {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return static_cast<std::size_t>(r % n);
}

}  // namespace socfno
