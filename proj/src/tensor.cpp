#include "aelab/tensor.hpp"

#include "aelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace aelab {

namespace {

[[noreturn]] void shape_mismatch(const char* what, const Matrix& a, const Matrix& b) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
}

template <typename Op>
Matrix zip(const Matrix& a, const Matrix& b, const char* what, Op op) {
    require_same_shape(a, b, what);
    Matrix out(a.rows(), a.cols());
    auto x = a.data();
    auto y = b.data();
    auto z = out.data();
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = op(x[i], y[i]);
    return out;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw ShapeError("Matrix: " + std::to_string(data_.size()) + " values for shape (" +
                         std::to_string(rows) + "x" + std::to_string(cols) + ")");
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::row_vector(std::span<const double> values) {
    return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::row_matrix(std::size_t r) const {
    if (r >= rows_) throw std::out_of_range("row index out of range");
    return row_vector(row(r));
}

Matrix Matrix::col_matrix(std::size_t c) const {
    if (c >= cols_) throw std::out_of_range("column index out of range");
    Matrix out(rows_, 1);
    for (std::size_t r = 0; r < rows_; ++r) out(r, 0) = (*this)(r, c);
    return out;
}

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows_) throw std::out_of_range("row index out of range");
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(indices[i] * cols_), cols_,
                    out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    }
    return out;
}

std::string Matrix::shape_string() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) shape_mismatch(what, a, b);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) shape_mismatch("matmul", a, b);
    Matrix out(a.rows(), b.cols());
    const std::size_t n = a.cols();
    const std::size_t m = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* dst = out.row(i).data();
        const double* lhs = a.row(i).data();
        for (std::size_t k = 0; k < n; ++k) {
            const double s = lhs[k];
            if (s == 0.0) continue;
            const double* rhs = b.row(k).data();
            for (std::size_t j = 0; j < m; ++j) dst[j] += s * rhs[j];
        }
    }
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) shape_mismatch("matmul_tn", a, b);
    Matrix out(a.cols(), b.cols());
    const std::size_t m = b.cols();
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* lhs = a.row(k).data();
        const double* rhs = b.row(k).data();
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double s = lhs[i];
            if (s == 0.0) continue;
            double* dst = out.row(i).data();
            for (std::size_t j = 0; j < m; ++j) dst[j] += s * rhs[j];
        }
    }
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) shape_mismatch("matmul_nt", a, b);
    Matrix out(a.rows(), b.rows());
    const std::size_t n = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* lhs = a.row(i).data();
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* rhs = b.row(j).data();
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += lhs[k] * rhs[k];
            out(i, j) = acc;
        }
    }
    return out;
}

Matrix map(const Matrix& m, const std::function<double(double)>& f) {
    Matrix out(m.rows(), m.cols());
    std::transform(m.data().begin(), m.data().end(), out.data().begin(), f);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Matrix sub(const Matrix& a, const Matrix& b) {
    return zip(a, b, "sub", [](double x, double y) { return x - y; });
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    return zip(a, b, "hadamard", [](double x, double y) { return x * y; });
}

Matrix scale(const Matrix& m, double factor) {
    Matrix out(m.rows(), m.cols());
    std::transform(m.data().begin(), m.data().end(), out.data().begin(),
                   [factor](double v) { return v * factor; });
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
    return out;
}

Matrix row_sum(const Matrix& m) {
    Matrix out(1, m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto src = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) out(0, c) += src[c];
    }
    return out;
}

Matrix add_row_vector(const Matrix& m, const Matrix& row) {
    if (row.rows() != 1 || row.cols() != m.cols()) shape_mismatch("add_row_vector", m, row);
    Matrix out = m;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto dst = out.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) dst[c] += row(0, c);
    }
    return out;
}

double sum(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.data()) acc += v;
    return acc;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_csv(std::ostream& out, const Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << format_real(m(r, c));
        }
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_csv(out, m);
}

Matrix read_csv(std::istream& in) {
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t count = 0;
        std::stringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(field, &used);
            } catch (const std::exception&) {
                throw ParseError(line_no, "not a number: '" + field + "'");
            }
            if (used != field.size()) throw ParseError(line_no, "trailing characters in '" + field + "'");
            values.push_back(v);
            ++count;
        }
        if (rows == 0) cols = count;
        else if (count != cols)
            throw ParseError(line_no, "expected " + std::to_string(cols) + " fields, got " +
                                          std::to_string(count));
        ++rows;
    }
    if (rows == 0) throw ParseError(line_no, "empty matrix");
    return Matrix(rows, cols, std::move(values));
}

Matrix read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return read_csv(in);
}

}  // namespace aelab
