#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "condiquant/conditioner.hpp"
#include "condiquant/matrix.hpp"
#include "condiquant/quantizer.hpp"

namespace cq {

/// One linear layer paired with its calibration capture. The activation is
/// the matrix of calibration samples feeding the layer (samples x in).
struct LayerRecord {
    std::string name;
    Matrix weight;      // in x out
    Matrix activation;  // samples x in
    bool condition_enabled = true;
};

enum class Nonlinearity { kNone, kRelu };

/// Plain chain of linear layers with an elementwise nonlinearity in each gap
/// between consecutive layers.
struct ToyNet {
    std::vector<LayerRecord> layers;
    std::vector<Nonlinearity> gaps;  // size layers.size() - 1

    void validate() const;
};

/// Per-layer fake-quantization choice for a forward pass.
struct LayerQuant {
    QuantSpec activation;
    QuantSpec weight;
};

struct ForwardResult {
    Matrix output;
    std::vector<Matrix> captured;  // per-layer input as fed to the layer, pre-quantization
};

/// Sequential forward pass. With quant specs present, both the incoming
/// activation and the weight are fake-quantized at each layer.
ForwardResult forward(const ToyNet& net, const Matrix& input,
                      const std::vector<std::optional<LayerQuant>>& quant = {},
                      bool capture = false);

/// Deterministic synthetic network: weights are random-orthogonal factors
/// around a geometric spectrum with sigma_max / sigma_min = kappa_target;
/// calibration activations start from a rank-deficient sample matrix and are
/// captured layer by layer from the full-precision chain.
ToyNet synth_network(std::uint64_t seed, std::size_t depth, std::size_t width,
                     double act_rank_ratio, double kappa_target);

enum class CalibrationMethod { kMinMax, kPercentile };

struct CalibrationChoice {
    CalibrationMethod method = CalibrationMethod::kMinMax;
    double percentile = 0.01;  // used by kPercentile only
};

QuantSpec calibrate(const Matrix& x, int bits, const CalibrationChoice& choice);

struct LayerConditionReport {
    std::string name;
    bool conditioned = false;
    ConditionerTrace trace;  // empty when not conditioned
};

/// Quantizers used by one pipeline layer: the activation spec is shared by
/// the baseline and conditioned paths, the weight specs are per path.
struct LayerSpecs {
    QuantSpec activation;
    QuantSpec weight_baseline;
    QuantSpec weight_conditioned;
};

struct PipelineResult {
    int bits;
    double psnr_fp_vs_quant_baseline;
    double psnr_fp_vs_quant_conditioned;
    double conditioned_fp_rel_err;  // FP-path deviation introduced by conditioning
    std::vector<LayerConditionReport> layer_reports;
    std::vector<LayerSpecs> specs;
    std::vector<Matrix> weights_conditioned;  // per layer; original where disabled
};

/// Full regression: FP forward on a held-out input, quantized baseline
/// forward, conditioning of every enabled layer, quantized conditioned
/// forward, both PSNRs against the FP output.
PipelineResult run_pipeline(const ToyNet& net, int bits, const ConditionerConfig& config,
                            const CalibrationChoice& calib);

/// 10 log10(peak^2 / MSE); +infinity when the inputs are identical.
double psnr(const Matrix& a, const Matrix& b, double peak);

/// Mean structural similarity over non-overlapping 8x8 windows with the
/// standard constants C1 = (0.01 peak)^2, C2 = (0.03 peak)^2.
double ssim(const Matrix& a, const Matrix& b, double peak);

}  // namespace cq
