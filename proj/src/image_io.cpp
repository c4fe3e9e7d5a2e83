#include "aelab/image_io.hpp"

#include "aelab/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace aelab {

void write_pgm(const std::filesystem::path& path, std::span<const double> pixels, std::size_t height,
               std::size_t width) {
    if (pixels.size() != height * width) {
        throw std::invalid_argument("write_pgm: " + std::to_string(pixels.size()) + " pixels for " +
                                    std::to_string(height) + "x" + std::to_string(width));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n" << width << ' ' << height << "\n255\n";
    std::vector<char> bytes(pixels.size());
    std::transform(pixels.begin(), pixels.end(), bytes.begin(), [](double v) {
        const double clamped = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
        return static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0)));
    });
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

namespace {

// Reads one whitespace-delimited header token, skipping comments. Tracks the
// header line so errors can point at it.
std::string next_token(std::istream& in, std::size_t& line) {
    std::string token;
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
            continue;
        }
        if (std::isspace(ch)) {
            if (ch == '\n') ++line;
            if (!token.empty()) break;
        } else {
            token.push_back(static_cast<char>(ch));
        }
        ch = in.get();
    }
    if (token.empty()) throw ParseError(line, "unexpected end of PGM header");
    return token;
}

std::size_t parse_header_int(const std::string& token, std::size_t line) {
    if (token.empty() || !std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); })) {
        throw ParseError(line, "expected a positive integer in PGM header, got '" + token + "'");
    }
    return std::stoul(token);
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::size_t line = 1;
    if (next_token(in, line) != "P5") throw ParseError(1, "not a binary PGM (missing P5 magic)");
    GrayImage img;
    img.width = parse_header_int(next_token(in, line), line);
    img.height = parse_header_int(next_token(in, line), line);
    const std::size_t maxval = parse_header_int(next_token(in, line), line);
    if (img.width == 0 || img.height == 0) throw ParseError(line, "zero image dimension");
    if (maxval == 0 || maxval > 255) throw ParseError(line, "unsupported maxval " + std::to_string(maxval));
    // next_token consumed exactly one whitespace byte after maxval.
    std::vector<char> bytes(img.width * img.height);
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
        throw ParseError(line, "pixel data truncated: expected " + std::to_string(bytes.size()) + " bytes");
    }
    img.pixels.resize(bytes.size());
    std::transform(bytes.begin(), bytes.end(), img.pixels.begin(), [maxval](char b) {
        return static_cast<double>(static_cast<unsigned char>(b)) / static_cast<double>(maxval);
    });
    return img;
}

}  // namespace aelab
