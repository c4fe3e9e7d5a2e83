#include "aelab/datasets.hpp"

#include "aelab/errors.hpp"
#include "aelab/image_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace aelab {

void Dataset::validate() const {
    if (images.cols() != height * width) {
        throw std::invalid_argument("dataset '" + name + "': " + std::to_string(images.cols()) +
                                    " pixels per row but shape " + std::to_string(height) + "x" +
                                    std::to_string(width));
    }
    if (!angles.empty() && angles.size() != images.rows())
        throw std::invalid_argument("dataset '" + name + "': angle count does not match sample count");
    if (anomalous.size() != images.rows())
        throw std::invalid_argument("dataset '" + name + "': anomaly flag count does not match sample count");
}

std::string_view to_string(AnomalyKind kind) {
    switch (kind) {
        case AnomalyKind::blob_defect: return "blob_defect";
        case AnomalyKind::noise: return "noise";
        case AnomalyKind::double_line: return "double_line";
    }
    return "noise";
}

AnomalyKind parse_anomaly_kind(std::string_view name) {
    if (name == "blob_defect" || name == "blob") return AnomalyKind::blob_defect;
    if (name == "noise") return AnomalyKind::noise;
    if (name == "double_line" || name == "double") return AnomalyKind::double_line;
    throw std::invalid_argument("unknown anomaly kind '" + std::string(name) + "'");
}

std::vector<double> line_image(double angle, std::size_t size) {
    const double nx = std::cos(angle);
    const double ny = std::sin(angle);
    const double half = (static_cast<double>(size) - 1.0) / 2.0;
    std::vector<double> pixels(size * size);
    for (std::size_t r = 0; r < size; ++r) {
        const double y = half - static_cast<double>(r);
        for (std::size_t c = 0; c < size; ++c) {
            const double x = static_cast<double>(c) - half;
            pixels[r * size + c] = x * nx + y * ny >= 0.0 ? 1.0 : 0.0;
        }
    }
    return pixels;
}

namespace {

Dataset empty_dataset(std::string name, std::size_t n, std::size_t size) {
    Dataset d;
    d.name = std::move(name);
    d.images = Matrix(n, size * size);
    d.height = size;
    d.width = size;
    d.anomalous.assign(n, false);
    return d;
}

void set_row(Matrix& m, std::size_t r, const std::vector<double>& values) {
    std::copy(values.begin(), values.end(), m.row(r).begin());
}

}  // namespace

Dataset gen_line_dataset(std::size_t n, std::size_t size, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("gen_line_dataset: n must be >= 1");
    if (size < 2) throw std::invalid_argument("gen_line_dataset: size must be >= 2");
    Dataset d = empty_dataset("line", n, size);
    d.angles.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.angles[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        set_row(d.images, i, line_image(d.angles[i], size));
    }
    return d;
}

Dataset gen_quad_dataset() {
    Dataset d;
    d.name = "quad";
    d.height = 2;
    d.width = 2;
    d.images = Matrix{{0, 0, 1, 1}, {1, 0, 1, 0}, {1, 1, 0, 0}, {0, 1, 0, 1}};
    d.anomalous.assign(4, false);
    return d;
}

Dataset gen_anomaly_dataset(std::size_t n, std::size_t size, RngStream& rng, AnomalyKind kind) {
    if (n < 1) throw std::invalid_argument("gen_anomaly_dataset: n must be >= 1");
    if (size < 2) throw std::invalid_argument("gen_anomaly_dataset: size must be >= 2");
    Dataset d = empty_dataset(std::string("anomaly_") + std::string(to_string(kind)), n, size);
    d.anomalous.assign(n, true);
    if (kind == AnomalyKind::blob_defect) d.angles.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> img;
        switch (kind) {
            case AnomalyKind::blob_defect: {
                d.angles[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
                img = line_image(d.angles[i], size);
                const std::size_t side = std::min<std::size_t>(3 + rng.uniform_index(3), size);
                const std::size_t r0 = rng.uniform_index(size - side + 1);
                const std::size_t c0 = rng.uniform_index(size - side + 1);
                for (std::size_t r = r0; r < r0 + side; ++r)
                    for (std::size_t c = c0; c < c0 + side; ++c) img[r * size + c] = 1.0 - img[r * size + c];
                break;
            }
            case AnomalyKind::noise:
                img.resize(size * size);
                for (double& v : img) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
                break;
            case AnomalyKind::double_line: {
                const auto first = line_image(rng.uniform(0.0, 2.0 * std::numbers::pi), size);
                img = line_image(rng.uniform(0.0, 2.0 * std::numbers::pi), size);
                for (std::size_t p = 0; p < img.size(); ++p) img[p] = first[p] != img[p] ? 1.0 : 0.0;
                break;
            }
        }
        set_row(d.images, i, img);
    }
    return d;
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir, bool write_pgm_files) {
    data.validate();
    std::filesystem::create_directories(dir);
    {
        std::ofstream meta(dir / "dataset.txt");
        if (!meta) throw std::runtime_error("cannot write " + (dir / "dataset.txt").string());
        meta << "name=" << data.name << "\nn=" << data.size() << "\nheight=" << data.height
             << "\nwidth=" << data.width << '\n';
    }
    write_csv(dir / "images.csv", data.images);
    {
        std::ofstream labels(dir / "labels.csv");
        labels << "index,angle,anomalous\n";
        for (std::size_t i = 0; i < data.size(); ++i) {
            labels << i << ',';
            if (!data.angles.empty()) labels << format_real(data.angles[i]);
            labels << ',' << (data.anomalous[i] ? 1 : 0) << '\n';
        }
    }
    if (write_pgm_files) {
        std::filesystem::create_directories(dir / "images");
        char name[32];
        for (std::size_t i = 0; i < data.size(); ++i) {
            std::snprintf(name, sizeof name, "img_%05zu.pgm", i);
            write_pgm(dir / "images" / name, data.images.row(i), data.height, data.width);
        }
    }
}

Dataset load_dataset(const std::filesystem::path& dir) {
    std::ifstream meta(dir / "dataset.txt");
    if (!meta) throw std::runtime_error("no dataset at " + dir.string() + " (missing dataset.txt)");
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(meta, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "dataset.txt: expected key=value");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    for (const char* key : {"name", "n", "height", "width"}) {
        if (!kv.count(key)) throw ParseError(line_no, std::string("dataset.txt: missing key ") + key);
    }
    Dataset d;
    d.name = kv["name"];
    d.height = std::stoul(kv["height"]);
    d.width = std::stoul(kv["width"]);
    d.images = read_csv(dir / "images.csv");
    if (d.images.rows() != std::stoul(kv["n"]))
        throw std::runtime_error("images.csv row count does not match dataset.txt");
    d.anomalous.assign(d.images.rows(), false);

    std::ifstream labels(dir / "labels.csv");
    if (labels) {
        std::getline(labels, line);  // header
        line_no = 1;
        std::vector<double> angles;
        std::size_t i = 0;
        while (std::getline(labels, line)) {
            ++line_no;
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string index, angle, flag;
            if (!std::getline(ss, index, ',') || !std::getline(ss, angle, ',') || !std::getline(ss, flag, ','))
                throw ParseError(line_no, "labels.csv: expected index,angle,anomalous");
            if (i >= d.size()) throw ParseError(line_no, "labels.csv: more labels than images");
            if (!angle.empty()) angles.push_back(std::stod(angle));
            d.anomalous[i++] = flag == "1";
        }
        if (angles.size() == d.size()) d.angles = std::move(angles);
    }
    d.validate();
    return d;
}

}  // namespace aelab
