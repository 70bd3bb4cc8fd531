#include "condiquant/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cq {

namespace {

void check_dims(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("matrix dimensions must be positive, got " + std::to_string(rows) +
                         "x" + std::to_string(cols));
    }
}

void check_finite(const std::vector<double>& data) {
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw NumericalError("matrix element is not finite");
        }
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    check_dims(rows, cols);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    check_dims(rows, cols);
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("data length " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    check_finite(data_);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    check_dims(rows_, cols_);
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) {
            throw ShapeError("ragged initializer: expected " + std::to_string(cols_) +
                             " columns, got " + std::to_string(row.size()));
        }
        data_.insert(data_.end(), row.begin(), row.end());
    }
    check_finite(data_);
}

Matrix Matrix::zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
    Matrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m.data_[i * values.size() + i] = values[i];
    check_finite(m.data_);
    return m;
}

Matrix Matrix::with(std::size_t r, std::size_t c, double value) const {
    std::vector<double> data = data_;
    data[r * cols_ + c] = value;
    return Matrix(rows_, cols_, std::move(data));
}

std::string shape_string(const Matrix& a) {
    return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: incompatible shapes " + shape_string(a) + " and " + shape_string(b));
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    std::vector<double> out(m * n, 0.0);
    const auto ad = a.data();
    const auto bd = b.data();
    // i-k-j loop order keeps the inner loop contiguous over both b and out.
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ad[i * k + p];
            if (aip == 0.0) continue;
            const double* brow = &bd[p * n];
            double* orow = &out[i * n];
            for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
        }
    }
    return Matrix(m, n, std::move(out));
}

Matrix transpose(const Matrix& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[j * a.rows() + i] = a(i, j);
    return Matrix(a.cols(), a.rows(), std::move(out));
}

namespace {

Matrix zip(const Matrix& a, const Matrix& b, const char* what, double (*fn)(double, double)) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a) + " vs " +
                         shape_string(b));
    }
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a.data()[i], b.data()[i]);
    return Matrix(a.rows(), a.cols(), std::move(out));
}

}  // namespace

Matrix add(const Matrix& a, const Matrix& b) {
    return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    return zip(a, b, "subtract", [](double x, double y) { return x - y; });
}

Matrix scale(const Matrix& a, double factor) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a.data()[i] * factor;
    return Matrix(a.rows(), a.cols(), std::move(out));
}

Matrix map_elements(const Matrix& a, double (*fn)(double)) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a.data()[i]);
    return Matrix(a.rows(), a.cols(), std::move(out));
}

double fro_norm(const Matrix& a) {
    double sum = 0.0;
    for (double v : a.data()) sum += v * v;
    return std::sqrt(sum);
}

double max_abs_element(const Matrix& a) {
    double best = 0.0;
    for (double v : a.data()) best = std::max(best, std::abs(v));
    return best;
}

double min_element(const Matrix& a) {
    return *std::min_element(a.data().begin(), a.data().end());
}

double max_element(const Matrix& a) {
    return *std::max_element(a.data().begin(), a.data().end());
}

}  // namespace cq
