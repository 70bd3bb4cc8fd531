#pragma once

#include <optional>
#include <string>
#include <vector>

#include "condiquant/matrix.hpp"
#include "condiquant/quantizer.hpp"

namespace cq {

struct LayerRecord;  // defined in harness.hpp

/// Frobenius norms of the four terms of the quantized-layer expansion
/// X^ W^ = X W + X dW + dX W + dX dW.
struct AttributionEntry {
    std::string name;
    double exact;         // |X^ W^ - X W|_F
    double weight_only;   // |X dW|_F
    double act_only;      // |dX W|_F
    double second_order;  // |dX dW|_F
};

/// Relative output perturbation versus the condition-number bound
/// |dY|_2 / |Y|_2 <= kappa(W) * |dX|_2 / |X|_2.
struct SensitivityEntry {
    std::string name;
    double kappa_before;
    std::optional<double> kappa_after;  // filled when a conditioned weight is known
    double bound_rhs = 0.0;
    double observed_lhs = 0.0;
    double rank_ratio = 0.0;  // numerical rank ratio of the activation
    bool applicable = false;  // square full-rank weight and nonzero X, Y
};

AttributionEntry error_attribution(const Matrix& x, const Matrix& w, const QuantSpec& spec_x,
                                   const QuantSpec& spec_w, std::string name = {});

SensitivityEntry bound_check(const Matrix& x, const Matrix& w, const QuantSpec& spec_x,
                             std::string name = {});

struct RankEntry {
    std::string name;
    std::size_t rank = 0;
    double ratio = 0.0;
    std::optional<std::string> error;  // per-layer failure, batch continues
};

struct RankProfile {
    std::vector<RankEntry> layers;
    double mean_ratio = 0.0;  // over layers that produced a rank
};

RankProfile rank_profile(const std::vector<LayerRecord>& layers);

struct KappaEntry {
    std::string name;
    double kappa_before;
    double kappa_after;
};

struct KappaProfile {
    std::vector<KappaEntry> layers;
    double mean_before = 0.0;  // infinite values excluded from the means
    double mean_after = 0.0;
    std::size_t infinite_before = 0;
    std::size_t infinite_after = 0;
};

KappaProfile kappa_profile(const std::vector<LayerRecord>& layers,
                           const std::vector<Matrix>& weights_after);

/// Mean that is bit-exact under permutation of the inputs (sorts first).
double order_independent_mean(std::vector<double> values);

}  // namespace cq
