#include "condiquant/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace cq {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOrthoTol = 1e-12;  // relative off-diagonal threshold per column pair

struct JacobiResult {
    std::vector<double> columns;  // m x n working copy, row-major
    std::vector<double> v;        // n x n accumulated rotations, row-major
    std::vector<double> sigma;    // n column norms
};

// Orthogonalizes the columns of a (m x n, m >= n is not required) by plane
// rotations, accumulating them into v. On return the columns of `columns`
// are sigma_j * u_j.
JacobiResult one_sided_jacobi(const Matrix& a) {
    const std::size_t m = a.rows(), n = a.cols();
    JacobiResult r;
    r.columns.assign(a.data().begin(), a.data().end());
    r.v.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) r.v[i * n + i] = 1.0;

    auto col = [&](std::size_t k, std::size_t row) -> double& { return r.columns[row * n + k]; };

    bool converged = (n == 1);
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double dot_ij = 0.0, dot_ii = 0.0, dot_jj = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    const double ai = col(i, k), aj = col(j, k);
                    dot_ij += ai * aj;
                    dot_ii += ai * ai;
                    dot_jj += aj * aj;
                }
                if (std::abs(dot_ij) <= kOrthoTol * std::sqrt(dot_ii) * std::sqrt(dot_jj)) {
                    continue;
                }
                converged = false;

                double c, s;
                if (std::abs(dot_jj - dot_ii) < std::numeric_limits<double>::epsilon() * (dot_ii + dot_jj)) {
                    c = 1.0 / std::sqrt(2.0);
                    s = (dot_ij > 0.0) ? c : -c;
                } else {
                    const double zeta = (dot_jj - dot_ii) / (2.0 * dot_ij);
                    const double sign = zeta >= 0.0 ? 1.0 : -1.0;
                    const double t = sign / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                    c = 1.0 / std::sqrt(1.0 + t * t);
                    s = c * t;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double ai = col(i, k), aj = col(j, k);
                    col(i, k) = c * ai - s * aj;
                    col(j, k) = s * ai + c * aj;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vi = r.v[k * n + i], vj = r.v[k * n + j];
                    r.v[k * n + i] = c * vi - s * vj;
                    r.v[k * n + j] = s * vi + c * vj;
                }
            }
        }
    }
    if (!converged) {
        throw NumericalError("svd: Jacobi sweeps did not converge within " +
                             std::to_string(kMaxSweeps) + " sweeps for a " + shape_string(a) +
                             " matrix");
    }

    r.sigma.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t k = 0; k < m; ++k) sum += col(j, k) * col(j, k);
        r.sigma[j] = std::sqrt(sum);
    }
    return r;
}

// Fills column `target` of u (m x r, row-major) with a unit vector orthogonal
// to all columns in `done`. Used when a singular value is exactly zero and the
// Jacobi column carries no direction.
void fill_orthonormal_column(std::vector<double>& u, std::size_t m, std::size_t r,
                             std::size_t target, const std::vector<std::size_t>& done) {
    for (std::size_t candidate = 0; candidate < m; ++candidate) {
        std::vector<double> vec(m, 0.0);
        vec[candidate] = 1.0;
        for (std::size_t c : done) {
            double dot = 0.0;
            for (std::size_t k = 0; k < m; ++k) dot += vec[k] * u[k * r + c];
            for (std::size_t k = 0; k < m; ++k) vec[k] -= dot * u[k * r + c];
        }
        double norm = std::sqrt(std::inner_product(vec.begin(), vec.end(), vec.begin(), 0.0));
        if (norm > 0.5) {  // candidate not (almost) inside the span of `done`
            for (std::size_t k = 0; k < m; ++k) u[k * r + target] = vec[k] / norm;
            return;
        }
    }
    throw NumericalError("svd: failed to complete an orthonormal basis");
}

// SVD of a tall-or-square matrix via one-sided Jacobi; r = n = a.cols().
SvdFactors svd_tall(const Matrix& a) {
    const std::size_t m = a.rows(), n = a.cols();
    JacobiResult jr = one_sided_jacobi(a);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return jr.sigma[x] > jr.sigma[y]; });

    std::vector<double> u(m * n, 0.0), vt(n * n, 0.0), sigma(n, 0.0);
    std::vector<std::size_t> nonzero_cols;
    for (std::size_t dst = 0; dst < n; ++dst) {
        const std::size_t src = order[dst];
        sigma[dst] = jr.sigma[src];
        for (std::size_t k = 0; k < n; ++k) vt[dst * n + k] = jr.v[k * n + src];
        if (sigma[dst] > 0.0) {
            for (std::size_t k = 0; k < m; ++k) u[k * n + dst] = jr.columns[k * n + src] / sigma[dst];
            nonzero_cols.push_back(dst);
        }
    }
    for (std::size_t dst = 0; dst < n; ++dst) {
        if (sigma[dst] == 0.0) {
            fill_orthonormal_column(u, m, n, dst, nonzero_cols);
            nonzero_cols.push_back(dst);
        }
    }
    return SvdFactors{Matrix(m, n, std::move(u)), std::move(sigma), Matrix(n, n, std::move(vt))};
}

}  // namespace

SvdFactors svd(const Matrix& a) {
    if (a.rows() >= a.cols()) {
        return svd_tall(a);
    }
    // Wide case: decompose the transpose and swap the roles of u and v.
    SvdFactors t = svd_tall(transpose(a));
    return SvdFactors{transpose(t.vt), std::move(t.sigma), transpose(t.u)};
}

Matrix reconstruct(const SvdFactors& f) {
    Matrix scaled = f.u;
    std::vector<double> data(scaled.data().begin(), scaled.data().end());
    const std::size_t r = f.sigma.size();
    for (std::size_t i = 0; i < scaled.rows(); ++i)
        for (std::size_t j = 0; j < r; ++j) data[i * r + j] *= f.sigma[j];
    return matmul(Matrix(scaled.rows(), r, std::move(data)), f.vt);
}

double spectral_norm(const Matrix& a) { return svd(a).sigma.front(); }

double rank_tolerance(std::size_t rows, std::size_t cols, double sigma_max) {
    return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() *
           sigma_max;
}

double condition_number(const Matrix& a) {
    const SvdFactors f = svd(a);
    const double sigma_max = f.sigma.front();
    const double sigma_min = f.sigma.back();
    if (sigma_max == 0.0 || sigma_min < rank_tolerance(a.rows(), a.cols(), sigma_max)) {
        return std::numeric_limits<double>::infinity();
    }
    return sigma_max / sigma_min;
}

RankInfo numerical_rank(const Matrix& a) {
    const SvdFactors f = svd(a);
    const double tol = rank_tolerance(a.rows(), a.cols(), f.sigma.front());
    std::size_t rank = 0;
    for (double s : f.sigma) {
        if (s > tol) ++rank;
    }
    const double denom = static_cast<double>(std::min(a.rows(), a.cols()));
    return RankInfo{rank, static_cast<double>(rank) / denom};
}

}  // namespace cq
