#include "condiquant/conditioner.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "condiquant/svd.hpp"

namespace cq {

std::string to_string(TargetPolicy policy) {
    switch (policy) {
        case TargetPolicy::kMean: return "mean";
        case TargetPolicy::kMedian: return "median";
        case TargetPolicy::kMidpoint: return "midpoint";
    }
    return "mean";
}

TargetPolicy target_policy_from_string(const std::string& name) {
    if (name == "mean") return TargetPolicy::kMean;
    if (name == "median") return TargetPolicy::kMedian;
    if (name == "midpoint") return TargetPolicy::kMidpoint;
    throw ConfigError("unknown target policy '" + name + "' (expected mean|median|midpoint)");
}

void ConditionerConfig::validate() const {
    if (!(eta > 0.0)) throw ConfigError("eta must be positive");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    if (!(mu > 0.0)) throw ConfigError("mu must be positive");
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
}

double regularizer_value(const Matrix& w, double t) {
    if (t < 0.0) throw ConfigError("regularizer target t must be non-negative");
    double sum = 0.0;
    for (double s : svd(w).sigma) sum += (s - t) * (s - t);
    return sum;
}

double target_value(std::span<const double> sigma, TargetPolicy policy) {
    if (sigma.empty()) throw ConfigError("target_value: empty spectrum");
    switch (policy) {
        case TargetPolicy::kMean:
            return std::accumulate(sigma.begin(), sigma.end(), 0.0) /
                   static_cast<double>(sigma.size());
        case TargetPolicy::kMedian:
            // Lower median for even counts; sigma is descending.
            return sigma[sigma.size() / 2];
        case TargetPolicy::kMidpoint:
            return (sigma.front() + sigma.back()) / 2.0;
    }
    return sigma.front();
}

double shrink_singular_value(double sigma, double t, double lambda_mu) {
    return (sigma + 2.0 * lambda_mu * t) / (1.0 + 2.0 * lambda_mu);
}

Matrix gradient_step(const Matrix& w, const Matrix& x, const Matrix& y, double eta) {
    const Matrix residual = subtract(matmul(x, w), y);
    return subtract(w, scale(matmul(transpose(x), residual), eta));
}

ProximalResult proximal_step(const Matrix& w, double lambda_mu, TargetPolicy policy) {
    if (lambda_mu < 0.0) throw ConfigError("lambda * mu must be non-negative");
    SvdFactors f = svd(w);
    const double t = target_value(f.sigma, policy);
    for (double& s : f.sigma) s = shrink_singular_value(s, t, lambda_mu);
    return ProximalResult{reconstruct(f), t};
}

namespace {

TraceEntry make_trace_entry(std::size_t iter, const Matrix& w, const Matrix& x, const Matrix& y,
                            double y_fro, const ConditionerConfig& config) {
    const SvdFactors f = svd(w);
    const double sigma_max = f.sigma.front();
    const double sigma_min = f.sigma.back();
    double kappa = std::numeric_limits<double>::infinity();
    if (sigma_max > 0.0 && sigma_min >= rank_tolerance(w.rows(), w.cols(), sigma_max)) {
        kappa = sigma_max / sigma_min;
    }

    const double residual = fro_norm(subtract(matmul(x, w), y));
    double rel_err;
    if (y_fro > 0.0) {
        rel_err = residual / y_fro;
    } else {
        rel_err = residual == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }

    const double t = target_value(f.sigma, config.target_policy);
    double reg = 0.0;
    for (double s : f.sigma) reg += (s - t) * (s - t);
    return TraceEntry{iter, kappa, rel_err, 0.5 * residual * residual + config.lambda * reg};
}

}  // namespace

ConditionerResult condiquant(const Matrix& w0, const Matrix& x, const ConditionerConfig& config) {
    config.validate();
    if (x.cols() != w0.rows()) {
        throw ShapeError("condiquant: activation " + shape_string(x) +
                         " does not feed weight " + shape_string(w0));
    }
    const Matrix y = matmul(x, w0);  // fixed target output for every iteration
    const double y_fro = fro_norm(y);
    const bool run_gradient = fro_norm(x) > 0.0;

    ConditionerTrace trace;
    trace.reserve(config.max_iters + 1);
    trace.push_back(make_trace_entry(0, w0, x, y, y_fro, config));

    Matrix w = w0;
    for (std::size_t k = 1; k <= config.max_iters; ++k) {
        try {
            if (run_gradient) w = gradient_step(w, x, y, config.eta);
            w = proximal_step(w, config.lambda_mu(), config.target_policy).w;
            trace.push_back(make_trace_entry(k, w, x, y, y_fro, config));
        } catch (const NumericalError& e) {
            throw NumericalError("condiquant: iteration " + std::to_string(k) + ": " + e.what());
        }
    }
    return ConditionerResult{std::move(w), std::move(trace)};
}

}  // namespace cq
