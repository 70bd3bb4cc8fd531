#include <doctest.h>

#include <cmath>
#include <random>

#include "condiquant/matrix.hpp"
#include "oracles.hpp"

using cq::Matrix;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> data(rows * cols);
    for (double& v : data) v = dist(rng);
    return Matrix(rows, cols, std::move(data));
}

}  // namespace

TEST_SUITE_BEGIN("matrix");

TEST_CASE("construction rejects bad inputs") {
    CHECK_THROWS_AS(Matrix(0, 3), cq::ShapeError);
    CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), cq::ShapeError);
    CHECK_THROWS_AS(Matrix(1, 2, {1.0, std::nan("")}), cq::NumericalError);
    CHECK_THROWS_AS(Matrix(1, 1, {std::numeric_limits<double>::infinity()}), cq::NumericalError);
}

TEST_CASE("matmul identity returns the operand") {
    std::mt19937_64 rng(42);
    const Matrix a = random_matrix(3, 7, rng);
    CHECK(cq::matmul(Matrix::identity(3), a) == a);
}

TEST_CASE("matmul hand example") {
    const Matrix a{{1.0, 2.0}, {3.0, 4.0}};
    const Matrix b{{0.0}, {1.0}};
    const Matrix product = cq::matmul(a, b);
    CHECK(product(0, 0) == 2.0);
    CHECK(product(1, 0) == 4.0);
}

TEST_CASE("matmul matches the triple-loop oracle") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = random_matrix(8, 5, rng);
        const Matrix b = random_matrix(5, 3, rng);
        const Matrix got = cq::matmul(a, b);
        const Matrix want = oracle::matmul(a, b);
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(std::abs(got.data()[i] - want.data()[i]) <= 1e-12);
        }
    }
}

TEST_CASE("matmul rejects mismatched shapes naming both") {
    const Matrix a(2, 3);
    const Matrix b(4, 2);
    try {
        cq::matmul(a, b);
        FAIL("expected ShapeError");
    } catch (const cq::ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2x3") != std::string::npos);
        CHECK(msg.find("4x2") != std::string::npos);
    }
}

TEST_CASE("fro_norm basics") {
    CHECK(cq::fro_norm(Matrix::zeros(4, 6)) == 0.0);
    CHECK(cq::fro_norm(Matrix{{3.0, 4.0}}) == 5.0);
}

TEST_CASE("transpose round trip") {
    std::mt19937_64 rng(3);
    const Matrix a = random_matrix(5, 9, rng);
    CHECK(cq::transpose(cq::transpose(a)) == a);
}

TEST_CASE("elementwise helpers") {
    const Matrix a{{1.0, -2.0}, {3.0, -4.0}};
    const Matrix b{{0.5, 0.5}, {0.5, 0.5}};
    CHECK(cq::add(a, b)(0, 1) == -1.5);
    CHECK(cq::subtract(a, b)(1, 0) == 2.5);
    CHECK(cq::scale(a, -1.0)(1, 1) == 4.0);
    CHECK(cq::max_abs_element(a) == 4.0);
    CHECK(cq::min_element(a) == -4.0);
    CHECK(cq::max_element(a) == 3.0);
    CHECK_THROWS_AS(cq::add(a, Matrix(1, 2)), cq::ShapeError);
}

TEST_SUITE_END();
