#pragma once

#include <cstddef>
#include <vector>

#include "condiquant/matrix.hpp"

namespace cq {

/// Thin singular value decomposition a = u * diag(sigma) * vt with
/// r = min(rows, cols). u has orthonormal columns, vt orthonormal rows,
/// sigma is sorted descending and non-negative.
struct SvdFactors {
    Matrix u;
    std::vector<double> sigma;
    Matrix vt;
};

/// One-sided Jacobi SVD. Sweeps Jacobi rotations over column pairs until
/// every pair satisfies |a_i . a_j| <= 1e-12 * |a_i| * |a_j|; throws
/// NumericalError if that is not reached within 100 sweeps.
SvdFactors svd(const Matrix& a);

Matrix reconstruct(const SvdFactors& f);

/// sigma_max, i.e. the matrix 2-norm.
double spectral_norm(const Matrix& a);

/// Numerical-rank cutoff: max(rows, cols) * machine epsilon * sigma_max.
double rank_tolerance(std::size_t rows, std::size_t cols, double sigma_max);

/// sigma_max / sigma_min; +infinity when sigma_min falls below the rank
/// tolerance (degenerate layers are profiled, not rejected).
double condition_number(const Matrix& a);

struct RankInfo {
    std::size_t rank;
    double ratio;  // rank / min(rows, cols)
};

/// Count of singular values above rank_tolerance.
RankInfo numerical_rank(const Matrix& a);

}  // namespace cq
