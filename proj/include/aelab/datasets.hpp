#pragma once

#include "aelab/rng.hpp"
#include "aelab/tensor.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace aelab {

/// A batch of flattened images (row-major, top-left first) with labels.
struct Dataset {
    std::string name;
    Matrix images;  // n_samples x (height * width)
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> angles;   // radians; empty when not applicable
    std::vector<bool> anomalous;  // one flag per sample

    std::size_t size() const noexcept { return images.rows(); }
    std::size_t pixels() const noexcept { return height * width; }
    /// Throws std::invalid_argument if shapes or label counts disagree.
    void validate() const;
};

enum class AnomalyKind { blob_defect, noise, double_line };

std::string_view to_string(AnomalyKind kind);
AnomalyKind parse_anomaly_kind(std::string_view name);

/// One size x size half-plane image. Pixel (r, c) has centre
/// (c - (size-1)/2, (size-1)/2 - r); it is 1 when the dot product of that
/// centre with (cos angle, sin angle) is >= 0.
std::vector<double> line_image(double angle, std::size_t size);

/// n line images with angles uniform in [0, 2*pi).
Dataset gen_line_dataset(std::size_t n, std::size_t size, RngStream& rng);

/// The four 2x2 images 0011, 1010, 1100, 0101 in that order.
Dataset gen_quad_dataset();

/// Anomalous images; all samples are flagged anomalous.
///  blob_defect: a line image with a random k x k square (k in 3..5) flipped.
///               The base image's angle is kept in `angles`.
///  noise:       i.i.d. Bernoulli(0.5) pixels.
///  double_line: XOR of two independent line images.
Dataset gen_anomaly_dataset(std::size_t n, std::size_t size, RngStream& rng, AnomalyKind kind);

// On-disk layout of a dataset directory:
//   dataset.txt   key=value metadata (name, n, height, width)
//   images.csv    one flattened image per row
//   labels.csv    index,angle,anomalous
//   images/       one binary PGM per sample (img_00000.pgm, ...)
void save_dataset(const Dataset& data, const std::filesystem::path& dir, bool write_pgm = true);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace aelab
