#include "condiquant/random.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace cq {

double GaussianSampler::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double GaussianSampler::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

Matrix random_gaussian(std::size_t rows, std::size_t cols, GaussianSampler& rng) {
    std::vector<double> data(rows * cols);
    for (double& v : data) v = rng.normal();
    return Matrix(rows, cols, std::move(data));
}

Matrix random_orthogonal(std::size_t n, GaussianSampler& rng) {
    // Householder QR of a Gaussian matrix; q is assembled by applying the
    // reflectors to the identity in reverse order.
    std::vector<double> a(n * n);
    for (double& v : a) v = rng.normal();

    std::vector<std::vector<double>> reflectors;
    reflectors.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> v(n, 0.0);
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i) {
            v[i] = a[i * n + k];
            norm += v[i] * v[i];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            reflectors.emplace_back();  // degenerate column, skip
            continue;
        }
        const double alpha = v[k] >= 0.0 ? -norm : norm;
        v[k] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < n; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0) {
            reflectors.emplace_back();
            continue;
        }
        // Apply H = I - 2 v v^T / (v^T v) to the remaining columns.
        for (std::size_t j = k; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < n; ++i) dot += v[i] * a[i * n + j];
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = k; i < n; ++i) a[i * n + j] -= f * v[i];
        }
        reflectors.push_back(std::move(v));
    }

    std::vector<double> q(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;
    for (std::size_t k = reflectors.size(); k-- > 0;) {
        const auto& v = reflectors[k];
        if (v.empty()) continue;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < n; ++i) vnorm2 += v[i] * v[i];
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < n; ++i) dot += v[i] * q[i * n + j];
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = k; i < n; ++i) q[i * n + j] -= f * v[i];
        }
    }
    return Matrix(n, n, std::move(q));
}

}  // namespace cq
