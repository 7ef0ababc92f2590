#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "socfno/tensor.hpp"

namespace socfno {

/// 8-bit binary greymap (P5, maxval 255).
struct PgmImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // row-major
};

/// Linear map [lo, hi] -> [0, 255] with rounding; lo == hi maps everything to 0.
PgmImage quantize(const Tensor& map, double lo, double hi);
/// Inverse of quantize up to the 8-bit step.
Tensor dequantize(const PgmImage& image, double lo, double hi);

std::string encode_pgm(const PgmImage& image);
PgmImage decode_pgm(const std::string& bytes);

void write_pgm(const std::string& path, const PgmImage& image);
PgmImage read_pgm(const std::string& path);

}  // namespace socfno
