#include "aelab/errors.hpp"
#include "aelab/image_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace aelab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) { return fs::temp_directory_path() / ("aelab_pgm_" + name); }

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

}  // namespace

TEST(Pgm, BinaryImageRoundTripsExactly) {
    const std::vector<double> px{0, 1, 1, 0, 1, 0};
    const fs::path p = scratch("binary.pgm");
    write_pgm(p, px, 2, 3);
    const GrayImage img = read_pgm(p);
    EXPECT_EQ(img.height, 2u);
    EXPECT_EQ(img.width, 3u);
    EXPECT_EQ(img.pixels, px);
    fs::remove(p);
}

TEST(Pgm, GrayLevelsQuantiseTo255) {
    const std::vector<double> px{0.5, -1.0, 2.0, 0.25};
    const fs::path p = scratch("gray.pgm");
    write_pgm(p, px, 1, 4);
    const GrayImage img = read_pgm(p);
    EXPECT_NEAR(img.pixels[0], 0.5, 0.5 / 255);
    EXPECT_EQ(img.pixels[1], 0.0);
    EXPECT_EQ(img.pixels[2], 1.0);
    EXPECT_NEAR(img.pixels[3], 0.25, 0.5 / 255);
    fs::remove(p);
}

TEST(Pgm, HeaderIsP5WithMaxval255) {
    const fs::path p = scratch("header.pgm");
    write_pgm(p, std::vector<double>{1, 0}, 1, 2);
    std::ifstream in(p, std::ios::binary);
    std::string magic;
    std::size_t w, h, maxval;
    in >> magic >> w >> h >> maxval;
    EXPECT_EQ(magic, "P5");
    EXPECT_EQ(w, 2u);
    EXPECT_EQ(h, 1u);
    EXPECT_EQ(maxval, 255u);
    EXPECT_EQ(fs::file_size(p), static_cast<std::uintmax_t>(in.tellg()) + 1 + 2);
    fs::remove(p);
}

TEST(Pgm, ReadsCommentsAndSmallMaxval) {
    const fs::path p = scratch("comment.pgm");
    write_bytes(p, std::string("P5\n# made by hand\n2 1\n# another\n3\n") + char(0) + char(3));
    const GrayImage img = read_pgm(p);
    EXPECT_EQ(img.pixels, (std::vector<double>{0.0, 1.0}));
    fs::remove(p);
}

TEST(Pgm, RejectsMalformedFiles) {
    const fs::path p = scratch("bad.pgm");
    write_bytes(p, "P2\n1 1\n255\n0\n");
    EXPECT_THROW(read_pgm(p), ParseError);
    write_bytes(p, "P5\n2 2\n255\n\x01");
    EXPECT_THROW(read_pgm(p), ParseError);
    write_bytes(p, "P5\n2 2\n70000\n");
    EXPECT_THROW(read_pgm(p), ParseError);
    fs::remove(p);
    EXPECT_ANY_THROW(read_pgm(p));
}

TEST(Pgm, WriteRejectsWrongPixelCount) {
    EXPECT_THROW(write_pgm(scratch("n.pgm"), std::vector<double>{1, 2, 3}, 2, 2), std::invalid_argument);
}
