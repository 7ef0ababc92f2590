#pragma once

#include <random>

#include "socfno/data.hpp"

namespace socfno {

struct AugmentConfig {
    double probability = 0.8;
    double max_rotation_deg = 30.0;
    double max_shift_fraction = 0.2;
    double min_scale = 0.8;
    double max_scale = 1.2;
    double flip_probability = 0.5;  // independently for each axis
};

/// One concrete draw of the geometric transform.
struct AugmentParams {
    bool apply = false;
    double rotation_deg = 0.0;
    double shift_x = 0.0;  // pixels, along width
    double shift_y = 0.0;  // pixels, along height
    double scale = 1.0;
    bool flip_horizontal = false;
    bool flip_vertical = false;
};

/// Draws a fixed number of values from rng regardless of the outcome, so
/// per-sample substreams stay aligned.
AugmentParams draw_augment(const AugmentConfig& cfg, std::size_t height, std::size_t width, std::mt19937_64& rng);

/// Rotate/scale/shift about the raster centre (bilinear, reflection padding),
/// then flip. Every channel gets the same transform.
Tensor warp(const Tensor& raster, const AugmentParams& params);

RasterSample apply_augment(const RasterSample& sample, const AugmentParams& params);

RasterSample augment(const RasterSample& sample, const AugmentConfig& cfg, std::mt19937_64& rng);

}  // namespace socfno
