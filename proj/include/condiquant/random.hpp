#pragma once

#include <cstdint>
#include <random>

#include "condiquant/matrix.hpp"

namespace cq {

/// Seeded Gaussian source with a self-contained Box-Muller transform, so a
/// given seed yields the same stream on every standard library.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

    double uniform01();  // in [0, 1)
    double normal();     // standard normal

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

Matrix random_gaussian(std::size_t rows, std::size_t cols, GaussianSampler& rng);

/// Haar-style random orthogonal matrix via Householder QR of a Gaussian draw.
Matrix random_orthogonal(std::size_t n, GaussianSampler& rng);

}  // namespace cq
