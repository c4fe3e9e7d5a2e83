#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace aelab {

struct GrayImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> pixels;  // row-major, values in [0, 1]
};

/// Binary PGM (P5, maxval 255). Pixel values are clamped to [0, 1] and
/// scaled by 255 with rounding, so 0/1 images round-trip exactly.
void write_pgm(const std::filesystem::path& path, std::span<const double> pixels, std::size_t height,
               std::size_t width);

/// Reads P5 files with any maxval <= 255, including '#' header comments.
/// Throws ParseError on a malformed header or short pixel data.
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace aelab
