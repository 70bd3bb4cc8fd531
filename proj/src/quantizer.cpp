#include "condiquant/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "condiquant/svd.hpp"

namespace cq {

namespace {

constexpr double kDegenerateWiden = 1e-6;

void check_bits(int bits) {
    if (bits < 2 || bits > 8) {
        throw ConfigError("bit width must be in [2, 8], got " + std::to_string(bits));
    }
}

// Type-7 quantile: linear interpolation between order statistics.
double interpolated_quantile(const std::vector<double>& sorted, double q) {
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

QuantSpec make_spec_widened(double lower, double upper, int bits) {
    if (lower == upper) {
        lower -= kDegenerateWiden;
        upper += kDegenerateWiden;
    }
    return QuantSpec(bits, lower, upper);
}

}  // namespace

QuantSpec::QuantSpec(int bits, double lower, double upper) : bits(bits), lower(lower), upper(upper) {
    check_bits(bits);
    if (!(lower < upper)) {
        throw ConfigError("quantizer bounds must satisfy lower < upper, got [" +
                          std::to_string(lower) + ", " + std::to_string(upper) + "]");
    }
    if (!std::isfinite(scale()) || scale() <= 0.0) {
        throw ConfigError("quantizer scale is not finite and positive");
    }
}

double QuantSpec::scale() const { return static_cast<double>(max_code()) / (upper - lower); }

int QuantSpec::max_code() const { return (1 << bits) - 1; }

double QuantSpec::step() const { return 1.0 / scale(); }

QuantSpec calibrate_minmax(const Matrix& x, int bits) {
    check_bits(bits);
    return make_spec_widened(min_element(x), max_element(x), bits);
}

QuantSpec calibrate_percentile(const Matrix& x, int bits, double p) {
    check_bits(bits);
    if (!(p > 0.0 && p < 0.5)) {
        throw ConfigError("percentile must lie in (0, 0.5), got " + std::to_string(p));
    }
    std::vector<double> sorted(x.data().begin(), x.data().end());
    std::sort(sorted.begin(), sorted.end());
    return make_spec_widened(interpolated_quantile(sorted, p), interpolated_quantile(sorted, 1.0 - p),
                             bits);
}

double round_half_even(double v) {
    const double floor_v = std::floor(v);
    const double frac = v - floor_v;
    if (frac > 0.5) return floor_v + 1.0;
    if (frac < 0.5) return floor_v;
    return (std::fmod(floor_v, 2.0) == 0.0) ? floor_v : floor_v + 1.0;
}

QuantResult fake_quantize(const Matrix& x, const QuantSpec& spec) {
    const double s = spec.scale();
    const double max_code = spec.max_code();
    std::vector<double> quantized(x.size());
    std::vector<std::int32_t> codes(x.size());
    std::vector<double> error(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double clipped = std::min(std::max(x.data()[i], spec.lower), spec.upper);
        double code = round_half_even(s * (clipped - spec.lower));
        code = std::min(std::max(code, 0.0), max_code);
        quantized[i] = code / s + spec.lower;
        codes[i] = static_cast<std::int32_t>(code);
        error[i] = quantized[i] - x.data()[i];
    }
    return QuantResult{Matrix(x.rows(), x.cols(), std::move(quantized)),
                       CodeMatrix{x.rows(), x.cols(), std::move(codes)},
                       Matrix(x.rows(), x.cols(), std::move(error))};
}

QuantErrorNorms quant_error_norms(const Matrix& x, const QuantSpec& spec) {
    const Matrix delta = fake_quantize(x, spec).error;
    QuantErrorNorms norms{fro_norm(delta), spectral_norm(delta), std::nullopt};
    const double x_fro = fro_norm(x);
    if (x_fro > 0.0) norms.relative_fro = norms.fro / x_fro;
    return norms;
}

}  // namespace cq
