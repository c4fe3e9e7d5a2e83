// Plain-text model files.
//
//   aelab-model 1
//   input <height> <width>
//   variational <0|1>
//   encoder <count>
//   layer <in> <out> <activation>
//   <in lines of out weights>
//   <1 line of out biases>
//   ...
//   head                      (variational only: mean layer then logvar layer)
//   decoder <count>
//   ...
//   end

#include "aelab/errors.hpp"
#include "aelab/models.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace aelab {

namespace {

void write_layer(std::ostream& out, const DenseLayer& layer) {
    out << "layer " << layer.in_dim() << ' ' << layer.out_dim() << ' ' << to_string(layer.activation) << '\n';
    auto write_rows = [&out](const Matrix& m) {
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_real(m(r, c));
            out << '\n';
        }
    };
    write_rows(layer.weights);
    write_rows(layer.biases);
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-empty, non-comment line split into tokens.
    std::vector<std::string> next(const char* expecting) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const auto first = line.find_first_not_of(" \t");
            if (first == std::string::npos || line[first] == '#') continue;
            std::istringstream ss(line);
            std::vector<std::string> tokens;
            for (std::string t; ss >> t;) tokens.push_back(t);
            return tokens;
        }
        throw ParseError(line_ + 1, std::string("unexpected end of file, expecting ") + expecting);
    }

    std::vector<std::string> expect(const std::string& keyword, std::size_t args) {
        auto tokens = next(keyword.c_str());
        if (tokens.empty() || tokens[0] != keyword || tokens.size() != args + 1)
            fail("expected '" + keyword + "' with " + std::to_string(args) + " argument(s)");
        return tokens;
    }

    std::size_t to_size(const std::string& s) {
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(s, &used);
        } catch (const std::exception&) {
            fail("not an integer: '" + s + "'");
        }
        if (used != s.size()) fail("not an integer: '" + s + "'");
        return v;
    }

    double to_real(const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            fail("not a number: '" + s + "'");
        }
        if (used != s.size()) fail("not a number: '" + s + "'");
        return v;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

Matrix read_rows(LineReader& reader, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto tokens = reader.next("matrix row");
        if (tokens.size() != cols)
            reader.fail("expected " + std::to_string(cols) + " values, got " + std::to_string(tokens.size()));
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = reader.to_real(tokens[c]);
    }
    return m;
}

DenseLayer read_layer(LineReader& reader) {
    const auto header = reader.expect("layer", 3);
    const std::size_t in = reader.to_size(header[1]);
    const std::size_t out = reader.to_size(header[2]);
    if (in == 0 || out == 0) reader.fail("layer dimensions must be positive");
    Activation act;
    try {
        act = parse_activation(header[3]);
    } catch (const std::invalid_argument& e) {
        reader.fail(e.what());
    }
    Matrix w = read_rows(reader, in, out);
    Matrix b = read_rows(reader, 1, out);
    return DenseLayer(std::move(w), std::move(b), act);
}

std::vector<DenseLayer> read_section(LineReader& reader, const std::string& keyword) {
    const auto header = reader.expect(keyword, 1);
    const std::size_t count = reader.to_size(header[1]);
    if (count == 0) reader.fail(keyword + " must contain at least one layer");
    std::vector<DenseLayer> layers;
    for (std::size_t i = 0; i < count; ++i) layers.push_back(read_layer(reader));
    return layers;
}

}  // namespace

void save_model(const MlpModel& model, std::ostream& out) {
    const auto& net = model.network;
    out << "aelab-model 1\n";
    out << "input " << model.input_height << ' ' << model.input_width << '\n';
    out << "variational " << (net.is_variational() ? 1 : 0) << '\n';
    out << "encoder " << net.encoder.size() << '\n';
    for (const auto& l : net.encoder) write_layer(out, l);
    if (net.head) {
        out << "head\n";
        write_layer(out, net.head->mean_layer);
        write_layer(out, net.head->logvar_layer);
    }
    out << "decoder " << net.decoder.size() << '\n';
    for (const auto& l : net.decoder) write_layer(out, l);
    out << "end\n";
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    save_model(model, out);
}

MlpModel load_model(std::istream& in) {
    LineReader reader(in);
    const auto magic = reader.expect("aelab-model", 1);
    if (magic[1] != "1") reader.fail("unsupported model format version " + magic[1]);
    const auto input = reader.expect("input", 2);
    MlpModel model;
    model.input_height = reader.to_size(input[1]);
    model.input_width = reader.to_size(input[2]);
    const auto variational = reader.expect("variational", 1);
    if (variational[1] != "0" && variational[1] != "1") reader.fail("variational must be 0 or 1");

    Network net;
    net.encoder = read_section(reader, "encoder");
    if (variational[1] == "1") {
        reader.expect("head", 0);
        VariationalHead head;
        head.mean_layer = read_layer(reader);
        head.logvar_layer = read_layer(reader);
        net.head = std::move(head);
    }
    net.decoder = read_section(reader, "decoder");
    reader.expect("end", 0);
    try {
        net.validate();
    } catch (const std::exception& e) {
        reader.fail(e.what());
    }
    if (net.in_dim() != model.input_height * model.input_width || net.out_dim() != net.in_dim())
        reader.fail("layer dimensions do not match the declared input shape");
    model.network = std::move(net);
    return model;
}

MlpModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return load_model(in);
}

}  // namespace aelab
