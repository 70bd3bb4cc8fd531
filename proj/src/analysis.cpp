#include "condiquant/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "condiquant/harness.hpp"
#include "condiquant/svd.hpp"

namespace cq {

AttributionEntry error_attribution(const Matrix& x, const Matrix& w, const QuantSpec& spec_x,
                                   const QuantSpec& spec_w, std::string name) {
    if (x.cols() != w.rows()) {
        throw ShapeError("error_attribution: activation " + shape_string(x) +
                         " does not feed weight " + shape_string(w));
    }
    const QuantResult qx = fake_quantize(x, spec_x);
    const QuantResult qw = fake_quantize(w, spec_w);
    const Matrix exact = subtract(matmul(qx.quantized, qw.quantized), matmul(x, w));
    return AttributionEntry{std::move(name), fro_norm(exact), fro_norm(matmul(x, qw.error)),
                            fro_norm(matmul(qx.error, w)), fro_norm(matmul(qx.error, qw.error))};
}

SensitivityEntry bound_check(const Matrix& x, const Matrix& w, const QuantSpec& spec_x,
                             std::string name) {
    if (x.cols() != w.rows()) {
        throw ShapeError("bound_check: activation " + shape_string(x) + " does not feed weight " +
                         shape_string(w));
    }
    SensitivityEntry entry;
    entry.name = std::move(name);
    entry.kappa_before = condition_number(w);
    entry.rank_ratio = numerical_rank(x).ratio;

    const bool square_full_rank =
        w.rows() == w.cols() && numerical_rank(w).rank == w.rows();
    const Matrix delta_x = fake_quantize(x, spec_x).error;
    const double x_norm = spectral_norm(x);
    const double y_norm = spectral_norm(matmul(x, w));
    if (!square_full_rank || x_norm == 0.0 || y_norm == 0.0) {
        return entry;  // bound not applicable, reported as such
    }
    entry.applicable = true;
    entry.observed_lhs = spectral_norm(matmul(delta_x, w)) / y_norm;
    entry.bound_rhs = entry.kappa_before * spectral_norm(delta_x) / x_norm;
    return entry;
}

RankProfile rank_profile(const std::vector<LayerRecord>& layers) {
    if (layers.empty()) throw ConfigError("rank_profile: no layers");
    RankProfile profile;
    std::vector<double> ratios;
    for (const auto& layer : layers) {
        RankEntry entry;
        entry.name = layer.name;
        try {
            const RankInfo info = numerical_rank(layer.activation);
            entry.rank = info.rank;
            entry.ratio = info.ratio;
            ratios.push_back(info.ratio);
        } catch (const NumericalError& e) {
            entry.error = e.what();  // keep going; one bad layer must not sink the batch
        }
        profile.layers.push_back(std::move(entry));
    }
    profile.mean_ratio = ratios.empty() ? 0.0 : order_independent_mean(std::move(ratios));
    return profile;
}

KappaProfile kappa_profile(const std::vector<LayerRecord>& layers,
                           const std::vector<Matrix>& weights_after) {
    if (layers.size() != weights_after.size()) {
        throw ShapeError("kappa_profile: " + std::to_string(layers.size()) + " layers vs " +
                         std::to_string(weights_after.size()) + " conditioned weights");
    }
    KappaProfile profile;
    std::vector<double> before, after;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        KappaEntry entry{layers[i].name, condition_number(layers[i].weight),
                         condition_number(weights_after[i])};
        if (std::isinf(entry.kappa_before)) {
            ++profile.infinite_before;
        } else {
            before.push_back(entry.kappa_before);
        }
        if (std::isinf(entry.kappa_after)) {
            ++profile.infinite_after;
        } else {
            after.push_back(entry.kappa_after);
        }
        profile.layers.push_back(std::move(entry));
    }
    profile.mean_before = before.empty() ? 0.0 : order_independent_mean(std::move(before));
    profile.mean_after = after.empty() ? 0.0 : order_independent_mean(std::move(after));
    return profile;
}

double order_independent_mean(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace cq
