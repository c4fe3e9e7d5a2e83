#include "aelab/errors.hpp"
#include "aelab/rng.hpp"
#include "aelab/tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace aelab;

namespace {

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

Matrix random_matrix(std::size_t r, std::size_t c, RngStream& rng) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
    return m;
}

}  // namespace

TEST(Matrix, ConstructionAndShape) {
    Matrix m{{1, 2, 3}, {4, 5, 6}};
    EXPECT_EQ(m.rows(), 2u);
    EXPECT_EQ(m.cols(), 3u);
    EXPECT_EQ(m(1, 2), 6.0);
    EXPECT_EQ(m.shape_string(), "(2x3)");
    EXPECT_THROW((Matrix{{1, 2}, {3}}), ShapeError);
    EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(Matrix, MatmulMatchesTripleLoop) {
    RngStream rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(6), k = 1 + rng.uniform_index(6), m = 1 + rng.uniform_index(6);
        const Matrix a = random_matrix(n, k, rng), b = random_matrix(k, m, rng);
        EXPECT_LT(max_abs_diff(matmul(a, b), naive_matmul(a, b)), 1e-12);
        EXPECT_LT(max_abs_diff(matmul_tn(transpose(a), b), naive_matmul(a, b)), 1e-12);
        EXPECT_LT(max_abs_diff(matmul_nt(a, transpose(b)), naive_matmul(a, b)), 1e-12);
    }
}

TEST(Matrix, MatmulIsAssociativeAndHasIdentity) {
    RngStream rng(12);
    const Matrix a = random_matrix(3, 4, rng), b = random_matrix(4, 5, rng), c = random_matrix(5, 2, rng);
    EXPECT_LT(max_abs_diff(matmul(matmul(a, b), c), matmul(a, matmul(b, c))), 1e-12);
    EXPECT_EQ(matmul(a, Matrix::identity(4)), a);
    EXPECT_EQ(matmul(Matrix::identity(3), a), a);
}

TEST(Matrix, ShapeMismatchThrows) {
    EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
    EXPECT_THROW(add(Matrix(2, 3), Matrix(3, 2)), ShapeError);
    EXPECT_THROW(add_row_vector(Matrix(2, 3), Matrix(1, 2)), ShapeError);
}

TEST(Matrix, ElementwiseAndReductions) {
    const Matrix a{{1, -2}, {3, 4}};
    const Matrix b{{0.5, 2}, {-1, 1}};
    EXPECT_EQ(add(a, b), (Matrix{{1.5, 0}, {2, 5}}));
    EXPECT_EQ(sub(a, b), (Matrix{{0.5, -4}, {4, 3}}));
    EXPECT_EQ(hadamard(a, b), (Matrix{{0.5, -4}, {-3, 4}}));
    EXPECT_EQ(scale(a, 2.0), (Matrix{{2, -4}, {6, 8}}));
    EXPECT_EQ(row_sum(a), (Matrix{{4, 2}}));
    EXPECT_EQ(add_row_vector(a, Matrix{{10, 20}}), (Matrix{{11, 18}, {13, 24}}));
    EXPECT_EQ(sum(a), 6.0);
    EXPECT_EQ(transpose(transpose(a)), a);
    EXPECT_EQ(map(a, [](double x) { return x * x; }), (Matrix{{1, 4}, {9, 16}}));
}

TEST(Matrix, GatherRows) {
    const Matrix a{{1, 2}, {3, 4}, {5, 6}};
    const std::vector<std::size_t> idx{2, 0};
    EXPECT_EQ(a.gather_rows(idx), (Matrix{{5, 6}, {1, 2}}));
}

TEST(Matrix, AllFiniteDetectsNanAndInf) {
    Matrix a{{1, 2}};
    EXPECT_TRUE(a.all_finite());
    a(0, 1) = std::nan("");
    EXPECT_FALSE(a.all_finite());
    a(0, 1) = INFINITY;
    EXPECT_FALSE(a.all_finite());
}

TEST(Csv, RoundTripIsExact) {
    RngStream rng(3);
    const Matrix a = random_matrix(4, 7, rng);
    std::stringstream ss;
    write_csv(ss, a);
    EXPECT_EQ(read_csv(ss), a);
}

TEST(Csv, RaggedRowReportsLine) {
    std::stringstream ss("1,2\n3,4\n5\n");
    try {
        read_csv(ss);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    std::stringstream bad("1,x\n");
    EXPECT_THROW(read_csv(bad), ParseError);
}

TEST(Rng, SameSeedSameStream) {
    RngStream a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.normal();
        EXPECT_EQ(x, b.normal());
        differs |= x != c.normal();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, UniformMomentsAndRange) {
    RngStream rng(5);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
        s2 += u * u;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    // 5 standard errors
    EXPECT_NEAR(mean, 0.5, 5 * std::sqrt(1.0 / 12 / n));
    EXPECT_NEAR(var, 1.0 / 12, 0.002);
}

TEST(Rng, NormalMoments) {
    RngStream rng(6);
    const int n = 200000;
    double s = 0.0, s2 = 0.0, within3 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        s2 += z * z;
        within3 += std::abs(z) <= 3.0;
    }
    EXPECT_NEAR(s / n, 0.0, 5 / std::sqrt(double(n)));
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
    EXPECT_NEAR(within3 / n, std::erf(3.0 / std::sqrt(2.0)), 0.002);
}

TEST(Rng, UniformIndexCoversRangeEvenly) {
    RngStream rng(7);
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 50000; ++i) ++counts[rng.uniform_index(5)];
    for (int c : counts) EXPECT_NEAR(c, 10000, 500);
    EXPECT_THROW(rng.uniform_index(0), std::invalid_argument);
}
