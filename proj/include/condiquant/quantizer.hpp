#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "condiquant/matrix.hpp"

namespace cq {

/// One uniform affine fake quantizer: bit width plus clipping bounds.
/// scale() maps the clipping range onto the integer code range.
struct QuantSpec {
    int bits;      // in [2, 8]
    double lower;  // strictly below upper
    double upper;

    QuantSpec(int bits, double lower, double upper);

    double scale() const;       // (2^bits - 1) / (upper - lower)
    int max_code() const;       // 2^bits - 1
    double step() const;        // 1 / scale()
};

/// Integer codes produced by quantization, same layout as Matrix.
struct CodeMatrix {
    std::size_t rows;
    std::size_t cols;
    std::vector<std::int32_t> values;
};

struct QuantResult {
    Matrix quantized;  // dequantized values code / s + lower
    CodeMatrix codes;  // integer codes in [0, 2^bits - 1]
    Matrix error;      // quantized - original, element-wise
};

/// Bounds from the observed min/max; a constant input is widened by +-1e-6
/// so the bounds stay strictly ordered.
QuantSpec calibrate_minmax(const Matrix& x, int bits);

/// Bounds at the p and 1-p empirical quantiles of the flattened elements,
/// linear interpolation between order statistics. p must lie in (0, 0.5).
QuantSpec calibrate_percentile(const Matrix& x, int bits, double p);

/// clip -> round(scale * (x - lower)) -> code / scale + lower.
/// Ties round half to even.
QuantResult fake_quantize(const Matrix& x, const QuantSpec& spec);

struct QuantErrorNorms {
    double fro;
    double spectral;
    std::optional<double> relative_fro;  // |delta|_F / |x|_F, absent for x == 0
};

QuantErrorNorms quant_error_norms(const Matrix& x, const QuantSpec& spec);

/// Deterministic round-half-to-even, independent of the FP environment.
double round_half_even(double v);

}  // namespace cq
