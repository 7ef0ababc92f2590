#include "socfno/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "socfno/data.hpp"

namespace socfno {

namespace {

void plane_extent(const Tensor& map, std::size_t& height, std::size_t& width) {
    if (map.rank() == 2) {
        height = map.dim(0);
        width = map.dim(1);
    } else if (map.rank() == 3 && map.dim(0) == 1) {
        height = map.dim(1);
        width = map.dim(2);
    } else {
        throw InvalidArgument("pgm: expected a [H,W] or [1,H,W] map, got " + shape_string(map.shape()));
    }
}

}  // namespace

PgmImage quantize(const Tensor& map, double lo, double hi) {
    PgmImage img;
    plane_extent(map, img.height, img.width);
    if (!(hi >= lo)) throw InvalidArgument("pgm: scale maximum is below the minimum");
    img.pixels.resize(img.width * img.height);
    const double span = hi - lo;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const double t = span > 0.0 ? (map[i] - lo) / span : 0.0;
        img.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
    }
    return img;
}

Tensor dequantize(const PgmImage& image, double lo, double hi) {
    Tensor out({1, image.height, image.width});
    for (std::size_t i = 0; i < image.pixels.size(); ++i) out[i] = lo + (hi - lo) * image.pixels[i] / 255.0;
    return out;
}

std::string encode_pgm(const PgmImage& image) {
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
}

PgmImage decode_pgm(const std::string& bytes) {
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_uint = [&]() -> std::size_t {
        skip_space();
        const std::size_t start = pos;
        std::size_t v = 0;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos])))
            v = v * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
        if (pos == start) throw FormatError("pgm: expected an unsigned integer in the header", start);
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError("pgm: missing P5 magic", 0);
    pos = 2;
    PgmImage img;
    img.width = read_uint();
    img.height = read_uint();
    const std::size_t maxval = read_uint();
    if (maxval != 255) throw FormatError("pgm: only maxval 255 is supported", pos);
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw FormatError("pgm: header must end with one whitespace byte", pos);
    ++pos;
    const std::size_t expected = img.width * img.height;
    if (bytes.size() - pos != expected)
        throw FormatError("pgm: expected " + std::to_string(expected) + " pixel bytes, found " +
                              std::to_string(bytes.size() - pos),
                          pos);
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
    return img;
}

void write_pgm(const std::string& path, const PgmImage& image) { write_file(path, encode_pgm(image)); }

PgmImage read_pgm(const std::string& path) { return decode_pgm(read_file(path)); }

}  // namespace socfno
