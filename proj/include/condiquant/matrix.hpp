#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "condiquant/errors.hpp"

namespace cq {

/// Dense row-major matrix of 64-bit reals. Immutable contract after
/// construction: every element is finite, rows and cols are >= 1.
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix zeros(std::size_t rows, std::size_t cols);
    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const double> data() const { return data_; }

    /// Builds a copy with one element replaced; re-validates finiteness.
    Matrix with(std::size_t r, std::size_t c, double value) const;

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

std::string shape_string(const Matrix& a);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double factor);
Matrix map_elements(const Matrix& a, double (*fn)(double));

/// Square root of the sum of squared elements.
double fro_norm(const Matrix& a);

double max_abs_element(const Matrix& a);
double min_element(const Matrix& a);
double max_element(const Matrix& a);

}  // namespace cq
