#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "condiquant/matrix.hpp"

namespace cq {

enum class TargetPolicy { kMean, kMedian, kMidpoint };

std::string to_string(TargetPolicy policy);
TargetPolicy target_policy_from_string(const std::string& name);

/// Hyperparameters of the conditioning loop. Defaults follow the reference
/// operating point: eta 1e-2, lambda 0.003, mu 1, 50 iterations, mean target.
struct ConditionerConfig {
    double eta = 1e-2;        // gradient step size, > 0
    double lambda = 0.003;    // regularization strength, >= 0
    double mu = 1.0;          // proximal balance, > 0
    std::size_t max_iters = 50;
    TargetPolicy target_policy = TargetPolicy::kMean;

    double lambda_mu() const { return lambda * mu; }
    void validate() const;
};

struct TraceEntry {
    std::size_t iter;
    double kappa;
    double output_rel_err;  // |X W_k - Y|_F / |Y|_F
    double objective;       // 0.5 |X W_k - Y|_F^2 + lambda * sum_i (sigma_i - t)^2
};

/// Per-iteration record; always max_iters + 1 entries (entry 0 is the
/// pre-optimization baseline).
using ConditionerTrace = std::vector<TraceEntry>;

/// sum_i (sigma_i(w) - t)^2 over all singular values of w.
double regularizer_value(const Matrix& w, double t);

/// Shrinkage target from a descending spectrum: mean, lower median, or
/// (sigma_max + sigma_min) / 2.
double target_value(std::span<const double> sigma_descending, TargetPolicy policy);

/// Closed-form minimizer of 0.5 (z - sigma)^2 + lambda_mu (z - t)^2.
double shrink_singular_value(double sigma, double t, double lambda_mu);

/// One smooth-part descent step: w - eta * x^T (x w - y).
Matrix gradient_step(const Matrix& w, const Matrix& x, const Matrix& y, double eta);

struct ProximalResult {
    Matrix w;
    double applied_t;
};

/// Spectral shrinkage: SVD of w, pull every singular value toward the policy
/// target, reconstruct. lambda_mu = 0 reproduces w up to reconstruction error.
ProximalResult proximal_step(const Matrix& w, double lambda_mu, TargetPolicy policy);

struct ConditionerResult {
    Matrix w_final;
    ConditionerTrace trace;
};

/// Alternates gradient_step and proximal_step for exactly max_iters
/// iterations against the fixed target output y = x * w0. The gradient step
/// is skipped when |x|_F == 0; the proximal step still runs.
ConditionerResult condiquant(const Matrix& w0, const Matrix& x, const ConditionerConfig& config);

}  // namespace cq
