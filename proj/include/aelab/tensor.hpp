#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aelab {

/// Raised whenever two operands have incompatible shapes. The message names both.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of doubles.
///
/// Every numeric array in the library (weights, biases, activations, image
/// batches) is a Matrix. Shapes are fixed at construction; there is no
/// broadcasting, so adding a bias to a batch goes through add_row_vector().
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix row_vector(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    Matrix row_matrix(std::size_t r) const;
    Matrix col_matrix(std::size_t c) const;
    /// Rows selected by index, in the given order.
    Matrix gather_rows(std::span<const std::size_t> indices) const;

    std::string shape_string() const;
    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T * b without materialising the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a * b^T without materialising the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix map(const Matrix& m, const std::function<double(double)>& f);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double factor);
Matrix transpose(const Matrix& m);
/// Column sums: (rows x cols) -> (1 x cols).
Matrix row_sum(const Matrix& m);
/// Adds a 1 x cols row vector to every row of m.
Matrix add_row_vector(const Matrix& m, const Matrix& row);

double sum(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

// CSV: one row per line, comma separated, 17 significant digits.
void write_csv(std::ostream& out, const Matrix& m);
void write_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_csv(std::istream& in);
Matrix read_csv(const std::filesystem::path& path);

/// Shortest-exact formatting used by every text emitter in the project.
std::string format_real(double value);

}  // namespace aelab
