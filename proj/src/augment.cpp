#include "socfno/augment.hpp"

#include <cmath>
#include <numbers>

namespace socfno {

AugmentParams draw_augment(const AugmentConfig& cfg, std::size_t height, std::size_t width, std::mt19937_64& rng) {
    const double gate = uniform01(rng);
    const double angle = uniform(rng, -cfg.max_rotation_deg, cfg.max_rotation_deg);
    const double sx = uniform(rng, -cfg.max_shift_fraction, cfg.max_shift_fraction);
    const double sy = uniform(rng, -cfg.max_shift_fraction, cfg.max_shift_fraction);
    const double scale = uniform(rng, cfg.min_scale, cfg.max_scale);
    const double fh = uniform01(rng);
    const double fv = uniform01(rng);

    AugmentParams p;
    p.apply = gate < cfg.probability;
    if (!p.apply) return p;
    p.rotation_deg = angle;
    p.shift_x = sx * static_cast<double>(width);
    p.shift_y = sy * static_cast<double>(height);
    p.scale = scale;
    p.flip_horizontal = fh < cfg.flip_probability;
    p.flip_vertical = fv < cfg.flip_probability;
    return p;
}

namespace {

// Mirror about the edge pixel centres: period 2(n-1).
double reflect(double u, std::size_t n) {
    if (n == 1) return 0.0;
    const double period = 2.0 * static_cast<double>(n - 1);
    u = std::fmod(std::abs(u), period);
    return u > static_cast<double>(n - 1) ? period - u : u;
}

double sample_bilinear(const double* plane, std::size_t height, std::size_t width, double y, double x) {
    y = reflect(y, height);
    x = reflect(x, width);
    const auto y0 = static_cast<std::size_t>(std::floor(y));
    const auto x0 = static_cast<std::size_t>(std::floor(x));
    const std::size_t y1 = std::min(y0 + 1, height - 1);
    const std::size_t x1 = std::min(x0 + 1, width - 1);
    const double fy = y - static_cast<double>(y0);
    const double fx = x - static_cast<double>(x0);
    const double top = plane[y0 * width + x0] * (1.0 - fx) + plane[y0 * width + x1] * fx;
    const double bottom = plane[y1 * width + x0] * (1.0 - fx) + plane[y1 * width + x1] * fx;
    return top * (1.0 - fy) + bottom * fy;
}

bool is_identity_geometry(const AugmentParams& p) {
    return p.rotation_deg == 0.0 && p.shift_x == 0.0 && p.shift_y == 0.0 && p.scale == 1.0;
}

}  // namespace

Tensor warp(const Tensor& raster, const AugmentParams& params) {
    if (raster.rank() != 3) throw InvalidArgument("warp: raster must be [C,H,W]");
    if (!params.apply) return raster;
    const std::size_t channels = raster.dim(0), height = raster.dim(1), width = raster.dim(2);
    Tensor out = raster;

    if (!is_identity_geometry(params)) {
        const double theta = params.rotation_deg * std::numbers::pi / 180.0;
        const double c = std::cos(theta), s = std::sin(theta);
        const double cy = 0.5 * static_cast<double>(height - 1);
        const double cx = 0.5 * static_cast<double>(width - 1);
        for (std::size_t ch = 0; ch < channels; ++ch) {
            const double* src = raster.channel(ch);
            double* dst = out.channel(ch);
            for (std::size_t i = 0; i < height; ++i) {
                for (std::size_t j = 0; j < width; ++j) {
                    // Inverse map: source = R(-theta) (dest - centre - shift) / scale + centre.
                    const double dx = static_cast<double>(j) - cx - params.shift_x;
                    const double dy = static_cast<double>(i) - cy - params.shift_y;
                    const double sx = (c * dx + s * dy) / params.scale + cx;
                    const double sy = (-s * dx + c * dy) / params.scale + cy;
                    dst[i * width + j] = sample_bilinear(src, height, width, sy, sx);
                }
            }
        }
    }

    if (params.flip_horizontal || params.flip_vertical) {
        const Tensor geo = out;
        for (std::size_t ch = 0; ch < channels; ++ch)
            for (std::size_t i = 0; i < height; ++i)
                for (std::size_t j = 0; j < width; ++j) {
                    const std::size_t si = params.flip_vertical ? height - 1 - i : i;
                    const std::size_t sj = params.flip_horizontal ? width - 1 - j : j;
                    out.at(ch, i, j) = geo.at(ch, si, sj);
                }
    }
    return out;
}

RasterSample apply_augment(const RasterSample& sample, const AugmentParams& params) {
    return {sample.id, warp(sample.input, params), warp(sample.target, params)};
}

RasterSample augment(const RasterSample& sample, const AugmentConfig& cfg, std::mt19937_64& rng) {
    return apply_augment(sample, draw_augment(cfg, sample.input.dim(1), sample.input.dim(2), rng));
}

}  // namespace socfno
