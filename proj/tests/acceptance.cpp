// Acceptance suite: one pass/fail line per criterion, exit 0 only when all
// criteria hold. Tolerances are fixed here, not tuned at runtime.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "condiquant/analysis.hpp"
#include "condiquant/conditioner.hpp"
#include "condiquant/harness.hpp"
#include "condiquant/quantizer.hpp"
#include "condiquant/random.hpp"
#include "condiquant/svd.hpp"
#include "condiquant/tensor_io.hpp"
#include "oracles.hpp"

using cq::Matrix;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && passed) {
            passed = false;
            detail = what;
        }
    }
};

Matrix random_uniform(std::size_t rows, std::size_t cols, double lo, double hi,
                      std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> data(rows * cols);
    for (double& v : data) v = dist(rng);
    return Matrix(rows, cols, std::move(data));
}

Matrix matrix_with_kappa(std::size_t n, double kappa, cq::GaussianSampler& rng) {
    std::vector<double> spectrum(n);
    for (std::size_t j = 0; j < n; ++j) {
        spectrum[j] = std::pow(kappa, -static_cast<double>(j) / static_cast<double>(n - 1));
    }
    return cq::matmul(cq::matmul(cq::random_orthogonal(n, rng), Matrix::diagonal(spectrum)),
                      cq::random_orthogonal(n, rng));
}

// ---------------------------------------------------------------------------
// 1. Proximal closed form vs a brute-force grid minimizer.
Outcome criterion_proximal_closed_form() {
    Outcome out;
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> sigma_dist(0.0, 10.0), t_dist(0.0, 5.0),
        lm_dist(0.0, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double sigma = sigma_dist(rng), t = t_dist(rng), lm = lm_dist(rng);
        const double closed = cq::shrink_singular_value(sigma, t, lm);
        const double grid =
            oracle::grid_minimize_shrinkage(sigma, t, lm, 0.0, std::max(sigma, t) + 1.0, 1e-6);
        out.require(std::abs(closed - grid) <= 2e-6,
                    "trial " + std::to_string(trial) + ": |closed - grid| = " +
                        std::to_string(std::abs(closed - grid)));
        if (!out.passed) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// 2. Kappa contraction: single proximal step and the full loop.
Outcome criterion_kappa_contraction() {
    Outcome out;
    cq::GaussianSampler rng(202);
    std::uniform_real_distribution<double> kappa_dist(1e3, 1e4);
    const cq::ConditionerConfig config;
    for (int trial = 0; trial < 100; ++trial) {
        const double kappa0_target = kappa_dist(rng.engine());
        const Matrix w0 = matrix_with_kappa(32, kappa0_target, rng);
        const double kappa0 = cq::condition_number(w0);

        const Matrix prox = cq::proximal_step(w0, config.lambda_mu(), config.target_policy).w;
        out.require(cq::condition_number(prox) < kappa0,
                    "single proximal step failed to reduce kappa at trial " + std::to_string(trial));

        Matrix x = random_uniform(64, 32, -1.0, 1.0, rng.engine());
        x = cq::scale(x, 1.0 / cq::spectral_norm(x));  // keep the gradient map contractive
        const cq::ConditionerResult full = cq::condiquant(w0, x, config);
        out.require(cq::condition_number(full.w_final) < kappa0,
                    "full loop failed to reduce kappa at trial " + std::to_string(trial));
        if (!out.passed) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// 3. Relative output error bound (condition-number inequality).
Outcome criterion_bound() {
    Outcome out;
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<std::size_t> dim_dist(8, 32);
    std::uniform_int_distribution<int> bits_dist(2, 4);
    int checked = 0;
    while (checked < 500) {
        const std::size_t n = dim_dist(rng);
        const Matrix x = random_uniform(n + 8, n, -2.0, 2.0, rng);
        const Matrix w = random_uniform(n, n, -1.0, 1.0, rng);
        const cq::SensitivityEntry entry =
            cq::bound_check(x, w, cq::calibrate_minmax(x, bits_dist(rng)));
        if (!entry.applicable) continue;  // rank-deficient draw, not part of the bound
        ++checked;
        out.require(entry.observed_lhs <= entry.bound_rhs + 1e-9,
                    "bound violated: lhs " + std::to_string(entry.observed_lhs) + " rhs " +
                        std::to_string(entry.bound_rhs));
        if (!out.passed) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// 4. Attribution ordering and exact three-term reconstruction.
Outcome criterion_attribution() {
    Outcome out;
    std::mt19937_64 rng(404);
    const int trials = 500;
    int dominated = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const Matrix x = random_uniform(12, 8, -1.5, 1.5, rng);
        const Matrix w = random_uniform(8, 8, -1.5, 1.5, rng);
        const cq::QuantSpec spec_x = cq::calibrate_minmax(x, 4);
        const cq::QuantSpec spec_w = cq::calibrate_minmax(w, 4);

        const cq::AttributionEntry entry = cq::error_attribution(x, w, spec_x, spec_w);
        if (entry.second_order <= std::min(entry.weight_only, entry.act_only)) ++dominated;

        const cq::QuantResult qx = cq::fake_quantize(x, spec_x);
        const cq::QuantResult qw = cq::fake_quantize(w, spec_w);
        const Matrix lhs = cq::subtract(cq::matmul(qx.quantized, qw.quantized), cq::matmul(x, w));
        const Matrix rhs = cq::add(cq::add(cq::matmul(x, qw.error), cq::matmul(qx.error, w)),
                                   cq::matmul(qx.error, qw.error));
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            out.require(std::abs(lhs.data()[i] - rhs.data()[i]) <= 1e-12,
                        "reconstruction identity off at trial " + std::to_string(trial));
        }
        if (!out.passed) return out;
    }
    out.require(dominated >= trials * 95 / 100,
                "second-order dominated in only " + std::to_string(dominated) + "/500 trials");
    out.detail = std::to_string(dominated) + "/500 dominated";
    return out;
}

// ---------------------------------------------------------------------------
// 5. Analytic gradient vs central finite differences.
Outcome criterion_gradient() {
    Outcome out;
    std::mt19937_64 rng(505);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix w = random_uniform(5, 4, -1.0, 1.0, rng);
        const Matrix x = random_uniform(6, 5, -1.0, 1.0, rng);
        const Matrix y = random_uniform(6, 4, -1.0, 1.0, rng);
        auto objective = [&](const Matrix& candidate) {
            const double r = cq::fro_norm(cq::subtract(cq::matmul(x, candidate), y));
            return 0.5 * r * r;
        };
        const Matrix analytic = cq::subtract(w, cq::gradient_step(w, x, y, 1.0));
        const Matrix numeric = oracle::central_difference_gradient(objective, w, 1e-5);
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            // Relative error with a small-denominator floor for near-zero entries.
            const double denom =
                std::max({std::abs(analytic.data()[i]), std::abs(numeric.data()[i]), 1e-3});
            worst = std::max(worst, std::abs(analytic.data()[i] - numeric.data()[i]) / denom);
        }
    }
    out.require(worst <= 1e-6, "max relative element error " + std::to_string(worst));
    std::ostringstream detail;
    detail << "max rel err " << worst;
    out.detail = detail.str();
    return out;
}

// ---------------------------------------------------------------------------
// 6. Headline regression on the pinned default synthetic network.
Outcome criterion_headline() {
    Outcome out;
    // Golden margins (dB) frozen from the first verified run at seed 7.
    struct Golden {
        int bits;
        double margin;
    };
    const Golden golden[] = {{2, 1.6805082985529145}, {3, 1.1640568737473185},
                             {4, 0.88991139845698086}};

    const cq::ToyNet net = cq::synth_network(7, 6, 64, 0.625, 1e3);
    std::ostringstream detail;
    for (const Golden& g : golden) {
        const cq::PipelineResult result =
            cq::run_pipeline(net, g.bits, cq::ConditionerConfig{}, cq::CalibrationChoice{});
        const double margin =
            result.psnr_fp_vs_quant_conditioned - result.psnr_fp_vs_quant_baseline;
        out.require(result.psnr_fp_vs_quant_conditioned > result.psnr_fp_vs_quant_baseline,
                    "no PSNR gain at " + std::to_string(g.bits) + " bits");
        out.require(result.conditioned_fp_rel_err <= 0.05,
                    "FP deviation " + std::to_string(result.conditioned_fp_rel_err) + " at " +
                        std::to_string(g.bits) + " bits");
        // Allow slack against the golden value for libm differences only.
        out.require(margin >= 0.75 * g.margin,
                    "margin " + std::to_string(margin) + " dB fell below golden " +
                        std::to_string(g.margin) + " at " + std::to_string(g.bits) + " bits");
        detail << g.bits << "b:+" << margin << "dB ";
    }
    if (out.detail.empty()) out.detail = detail.str();
    return out;
}

// ---------------------------------------------------------------------------
// 7. Fake-quantizer contract.
Outcome criterion_quantizer() {
    Outcome out;
    const cq::QuantSpec spec(2, 0.0, 3.0);  // scale exactly 1

    const cq::QuantResult mid = cq::fake_quantize(Matrix{{1.2}}, spec);
    out.require(mid.codes.values[0] == 1 && mid.quantized(0, 0) == 1.0, "hand case 1.2 -> 1.0");
    const cq::QuantResult clipped = cq::fake_quantize(Matrix{{-7.0}}, spec);
    out.require(clipped.codes.values[0] == 0 && clipped.quantized(0, 0) == 0.0,
                "hand case -7 -> clip to 0");
    const Matrix grid{{0.0, 1.0, 2.0, 3.0}};
    out.require(cq::fake_quantize(grid, spec).quantized == grid, "grid fixed point");

    std::mt19937_64 rng(707);
    for (int bits : {2, 3, 4, 6, 8}) {
        const Matrix x = random_uniform(16, 16, -3.0, 3.0, rng);
        const cq::QuantSpec s = cq::calibrate_minmax(x, bits);
        const cq::QuantResult once = cq::fake_quantize(x, s);
        const cq::QuantResult twice = cq::fake_quantize(once.quantized, s);
        out.require(twice.quantized == once.quantized,
                    "idempotence at " + std::to_string(bits) + " bits");

        std::set<double> distinct(once.quantized.data().begin(), once.quantized.data().end());
        out.require(distinct.size() <= (1u << bits),
                    "cardinality at " + std::to_string(bits) + " bits");

        const Matrix bump = random_uniform(16, 16, 0.0, 1.0, rng);
        const cq::QuantResult shifted = cq::fake_quantize(cq::add(x, bump), s);
        for (std::size_t i = 0; i < x.size(); ++i) {
            out.require(once.quantized.data()[i] <= shifted.quantized.data()[i],
                        "monotonicity at " + std::to_string(bits) + " bits");
        }
        if (!out.passed) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// 8. Container round trip and CLI report determinism.
Outcome criterion_determinism() {
    Outcome out;
    std::mt19937_64 rng(808);
    cq::NamedMatrices matrices;
    matrices.emplace_back("w", random_uniform(9, 7, -50.0, 50.0, rng));
    matrices.emplace_back("x", random_uniform(3, 9, -1e-6, 1e-6, rng));
    const std::vector<std::uint8_t> bytes = cq::encode_container(matrices);
    const cq::NamedMatrices decoded = cq::decode_container(bytes);
    out.require(cq::encode_container(decoded) == bytes, "container round trip not bit-exact");
    out.require(decoded[0].second == matrices[0].second, "decoded payload differs");

    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "cq_acceptance_reports";
    std::filesystem::create_directories(dir);
    const std::string r1 = (dir / "run1.json").string();
    const std::string r2 = (dir / "run2.json").string();
    const std::string base = std::string(CONDIQUANT_CLI_PATH) +
                             " simulate --seed 7 --depth 3 --width 24 --bits 2 --report ";
    out.require(std::system((base + r1 + " > /dev/null 2>&1").c_str()) == 0, "first run failed");
    out.require(std::system((base + r2 + " > /dev/null 2>&1").c_str()) == 0, "second run failed");
    if (out.passed) {
        std::ifstream f1(r1), f2(r2);
        nlohmann::json j1 = nlohmann::json::parse(f1);
        nlohmann::json j2 = nlohmann::json::parse(f2);
        j1.erase("wall_clock_seconds");
        j2.erase("wall_clock_seconds");
        out.require(j1.dump() == j2.dump(), "reports differ beyond the wall clock");
    }
    std::filesystem::remove_all(dir);
    return out;
}

struct Criterion {
    int id;
    const char* label;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "proximal closed form matches the grid minimizer", 10.0, criterion_proximal_closed_form},
        {2, "proximal and full-loop kappa contraction", 60.0, criterion_kappa_contraction},
        {3, "relative output error bound holds 500/500", 600.0, criterion_bound},
        {4, "attribution ordering and exact reconstruction", 600.0, criterion_attribution},
        {5, "analytic gradient matches finite differences", 600.0, criterion_gradient},
        {6, "headline regression at 2, 3 and 4 bits", 120.0, criterion_headline},
        {7, "fake-quantizer contract", 600.0, criterion_quantizer},
        {8, "container and CLI determinism", 600.0, criterion_determinism},
    };

    bool all_passed = true;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome.passed = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > c.budget_seconds) {
            outcome.passed = false;
            outcome.detail = "runtime " + std::to_string(seconds) + "s over budget";
        }
        all_passed = all_passed && outcome.passed;
        std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n", outcome.passed ? "PASS" : "FAIL", c.id,
                    c.label, seconds, outcome.detail.empty() ? "" : " -- ",
                    outcome.detail.c_str());
    }
    return all_passed ? 0 : 1;
}
