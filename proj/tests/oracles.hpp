#pragma once

// Slow, direct reference computations used to check the library. Nothing
// here calls into the code under test except plain tensor storage.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "socfno/tensor.hpp"

namespace oracle {

using socfno::Complex;
using socfno::Tensor;

/// Half-spectrum DFT by direct double sum: out[c][k1][k2], k2 <= W/2.
inline std::vector<Complex> naive_rfft2(const Tensor& x) {
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2), K = W / 2 + 1;
    std::vector<Complex> out(C * H * K);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t k1 = 0; k1 < H; ++k1)
            for (std::size_t k2 = 0; k2 < K; ++k2) {
                Complex s = 0.0;
                for (std::size_t h = 0; h < H; ++h)
                    for (std::size_t w = 0; w < W; ++w) {
                        const double frac = static_cast<double>((k1 * h) % H) / static_cast<double>(H) +
                                            static_cast<double>((k2 * w) % W) / static_cast<double>(W);
                        s += x.at(c, h, w) * std::polar(1.0, -2.0 * std::numbers::pi * frac);
                    }
                out[(c * H + k1) * K + k2] = s;
            }
    return out;
}

/// Real kernel whose full spectrum equals the Hermitian extension of a
/// constant coefficient r on every half-spectrum bin.
inline std::vector<double> constant_spectrum_kernel(Complex r, std::size_t H, std::size_t W) {
    std::vector<double> k(H * W, 0.0);
    for (std::size_t h = 0; h < H; ++h)
        for (std::size_t w = 0; w < W; ++w) {
            Complex s = 0.0;
            for (std::size_t k1 = 0; k1 < H; ++k1)
                for (std::size_t k2 = 0; k2 < W; ++k2) {
                    // Bins on a self-conjugate column keep only the real part.
                    const bool self_conj = k2 == 0 || 2 * k2 == W;
                    const bool stored = k2 <= W / 2;
                    const Complex coef = self_conj ? Complex(r.real(), 0.0) : (stored ? r : std::conj(r));
                    const double frac = static_cast<double>((k1 * h) % H) / static_cast<double>(H) +
                                        static_cast<double>((k2 * w) % W) / static_cast<double>(W);
                    s += coef * std::polar(1.0, 2.0 * std::numbers::pi * frac);
                }
            k[h * W + w] = s.real() / static_cast<double>(H * W);
        }
    return k;
}

/// y[o] = sum_i kernel[o][i] (*) v[i], circular convolution by direct sum.
inline Tensor circular_conv(const Tensor& v, const std::vector<std::vector<std::vector<double>>>& kernel) {
    const std::size_t Cin = v.dim(0), H = v.dim(1), W = v.dim(2), Cout = kernel.size();
    Tensor y({Cout, H, W});
    for (std::size_t o = 0; o < Cout; ++o)
        for (std::size_t i = 0; i < Cin; ++i)
            for (std::size_t h = 0; h < H; ++h)
                for (std::size_t w = 0; w < W; ++w) {
                    double s = 0.0;
                    for (std::size_t a = 0; a < H; ++a)
                        for (std::size_t b = 0; b < W; ++b)
                            s += kernel[o][i][a * W + b] * v.at(i, (h + H - a) % H, (w + W - b) % W);
                    y.at(o, h, w) += s;
                }
    return y;
}

/// Per-window SSIM with explicit two-pass moments over every valid 11x11
/// Gaussian window of a single [1,H,W] or [H,W] plane.
inline double ssim(const Tensor& x, const Tensor& y, double L, std::size_t n = 11, double sigma = 1.5) {
    const std::size_t H = x.rank() == 3 ? x.dim(1) : x.dim(0);
    const std::size_t W = x.rank() == 3 ? x.dim(2) : x.dim(1);
    std::vector<double> g(n * n);
    double total = 0.0;
    const double c = (static_cast<double>(n) - 1.0) / 2.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const double da = static_cast<double>(a) - c, db = static_cast<double>(b) - c;
            g[a * n + b] = std::exp(-(da * da + db * db) / (2.0 * sigma * sigma));
            total += g[a * n + b];
        }
    for (double& v : g) v /= total;
    const double C1 = (0.01 * L) * (0.01 * L), C2 = (0.03 * L) * (0.03 * L);
    double sum = 0.0;
    std::size_t windows = 0;
    for (std::size_t i = 0; i + n <= H; ++i)
        for (std::size_t j = 0; j + n <= W; ++j) {
            double mx = 0.0, my = 0.0;
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) {
                    mx += g[a * n + b] * x[(i + a) * W + j + b];
                    my += g[a * n + b] * y[(i + a) * W + j + b];
                }
            double vx = 0.0, vy = 0.0, cxy = 0.0;
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) {
                    const double dx = x[(i + a) * W + j + b] - mx, dy = y[(i + a) * W + j + b] - my;
                    vx += g[a * n + b] * dx * dx;
                    vy += g[a * n + b] * dy * dy;
                    cxy += g[a * n + b] * dx * dy;
                }
            sum += (2 * mx * my + C1) * (2 * cxy + C2) / ((mx * mx + my * my + C1) * (vx + vy + C2));
            ++windows;
        }
    return sum / static_cast<double>(windows);
}

inline double mae(const Tensor& p, const Tensor& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - t[i]);
    return s / static_cast<double>(p.size());
}

inline double rmse(const Tensor& p, const Tensor& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
    return std::sqrt(s / static_cast<double>(p.size()));
}

inline double mape(const Tensor& p, const Tensor& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - t[i]) / std::max(std::fabs(t[i]), 1e-6);
    return 100.0 * s / static_cast<double>(p.size());
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double population_std(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

struct Split {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
};

/// Exhaustive search over every feature and every midpoint between distinct
/// consecutive values, scoring each candidate by the two-pass sum of squared
/// deviations of both children.
inline Split exhaustive_split(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                              std::size_t min_leaf) {
    Split best;
    double best_cost = std::numeric_limits<double>::infinity();
    const std::size_t n = y.size(), F = x.empty() ? 0 : x[0].size();
    for (std::size_t f = 0; f < F; ++f) {
        std::vector<double> values;
        for (const auto& row : x) values.push_back(row[f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            const double thr = 0.5 * (values[k] + values[k + 1]);
            std::vector<double> left, right;
            for (std::size_t i = 0; i < n; ++i) (x[i][f] <= thr ? left : right).push_back(y[i]);
            if (left.size() < min_leaf || right.size() < min_leaf) continue;
            auto sse = [](const std::vector<double>& v) {
                const double m = mean(v);
                double s = 0.0;
                for (double e : v) s += (e - m) * (e - m);
                return s;
            };
            const double cost = sse(left) + sse(right);
            if (cost < best_cost) {
                best_cost = cost;
                best = {true, f, thr};
            }
        }
    }
    return best;
}

/// Textbook Adamax on one scalar.
struct ScalarAdamax {
    double m = 0.0, u = 0.0;
    int t = 0;
    double step(double theta, double g, double lr) {
        ++t;
        m = 0.9 * m + 0.1 * g;
        u = std::max(0.999 * u, std::fabs(g));
        return theta - (lr / (1.0 - std::pow(0.9, t))) * m / (u + 1e-8);
    }
};

}  // namespace oracle
