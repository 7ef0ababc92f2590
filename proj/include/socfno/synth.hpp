#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "socfno/data.hpp"

namespace socfno {

// Synthetic stand-in for multispectral rasters with a soil-carbon target.
//
// Each sample draws three latent fields z_0..z_2: periodic sums of random
// cosines with frequencies |a|,|b| <= 4 and Gaussian spectral falloff,
// scaled to unit variance. Band c is
//     band_c = base_c * exp(0.25 * sum_k kSynthMixing[c][k] z_k)
// and is stored rounded to binary32. From those stored bands:
//     ndvi     = (nir - red) / (nir + red)
//     moisture = (nir - swir1) / (nir + swir1)
//     context  = circular Gaussian blur of ndvi (sigma kSynthContextSigma,
//                offsets -kSynthContextRadius..kSynthContextRadius)
//     target   = kSynthScale * softplus(1.5 ndvi + moisture + 2 context - 0.5) + kSynthOffset
// The target is strictly positive.

inline constexpr std::array<double, 6> kSynthBase = {0.05, 0.08, 0.07, 0.30, 0.22, 0.12};
inline constexpr std::array<std::array<double, 3>, 6> kSynthMixing = {{
    {0.6, -0.3, 0.2},
    {0.5, -0.4, 0.3},
    {0.7, -0.6, 0.1},
    {-0.2, 0.9, 0.3},
    {0.3, 0.2, -0.8},
    {0.4, -0.1, -0.9},
}};
inline constexpr double kSynthContextSigma = 2.0;
inline constexpr std::size_t kSynthContextRadius = 6;
inline constexpr double kSynthScale = 8.0;
inline constexpr double kSynthOffset = 0.5;

/// Target raster [1,H,W] computed from a [6,H,W] band raster.
Tensor synth_target(const Tensor& bands);

/// n samples of HxW with splits assigned from the same seed.
Dataset synth_generate(std::uint64_t seed, std::size_t n, std::size_t height, std::size_t width);

}  // namespace socfno
