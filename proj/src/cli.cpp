#include "condiquant/cli.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "condiquant/analysis.hpp"
#include "condiquant/conditioner.hpp"
#include "condiquant/harness.hpp"
#include "condiquant/parallel.hpp"
#include "condiquant/report.hpp"
#include "condiquant/tensor_io.hpp"

namespace cq {

namespace {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Pairs each weight entry with the activation entry of the same name,
// preserving the order of the weights container.
std::vector<LayerRecord> load_layers(const std::string& weights_path, const std::string& acts_path) {
    const NamedMatrices weights = read_container(weights_path);
    const NamedMatrices acts = read_container(acts_path);
    std::map<std::string, const Matrix*> act_by_name;
    for (const auto& [name, matrix] : acts) act_by_name[name] = &matrix;

    std::vector<LayerRecord> layers;
    layers.reserve(weights.size());
    for (const auto& [name, weight] : weights) {
        const auto it = act_by_name.find(name);
        if (it == act_by_name.end()) {
            throw FormatError("no activation entry named '" + name + "' in " + acts_path);
        }
        if (it->second->cols() != weight.rows()) {
            throw ShapeError("layer '" + name + "': activation " + shape_string(*it->second) +
                             " does not feed weight " + shape_string(weight));
        }
        layers.push_back(LayerRecord{name, weight, *it->second, true});
    }
    if (layers.empty()) throw FormatError("weights container " + weights_path + " is empty");
    return layers;
}

std::vector<Matrix> condition_layers(const std::vector<LayerRecord>& layers,
                                     const ConditionerConfig& config,
                                     std::vector<ConditionerTrace>* traces) {
    std::vector<Matrix> out(layers.size(), Matrix(1, 1));
    if (traces) traces->resize(layers.size());
    parallel_for(layers.size(), worker_count(), [&](std::size_t i) {
        if (!layers[i].condition_enabled) {
            out[i] = layers[i].weight;
            return;
        }
        ConditionerResult result = condiquant(layers[i].weight, layers[i].activation, config);
        out[i] = std::move(result.w_final);
        if (traces) (*traces)[i] = std::move(result.trace);
    });
    return out;
}

struct ConditionArgs {
    std::string weights, acts, out, report;
    ConditionerConfig config;
    std::string target = "mean";
    std::vector<std::string> exclude;
};

int run_condition(const ConditionArgs& args) {
    Stopwatch clock;
    ConditionerConfig config = args.config;
    config.target_policy = target_policy_from_string(args.target);
    config.validate();

    std::vector<LayerRecord> layers = load_layers(args.weights, args.acts);
    for (const auto& name : args.exclude) {
        const auto it = std::find_if(layers.begin(), layers.end(),
                                     [&](const LayerRecord& l) { return l.name == name; });
        if (it == layers.end()) throw ConfigError("--exclude names unknown layer '" + name + "'");
        it->condition_enabled = false;
    }

    std::vector<ConditionerTrace> traces;
    const std::vector<Matrix> conditioned = condition_layers(layers, config, &traces);

    NamedMatrices out;
    out.reserve(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) out.emplace_back(layers[i].name, conditioned[i]);
    write_container(args.out, out);

    Json report = report_skeleton("condition");
    report["config"] = to_json(config);
    Json layer_reports = Json::array();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layer_reports.push_back(Json{{"name", layers[i].name},
                                     {"conditioned", layers[i].condition_enabled},
                                     {"trace", to_json(traces[i])}});
    }
    report["layers"] = std::move(layer_reports);
    emit_report(std::move(report), clock.seconds(), args.report);
    return 0;
}

struct QuantizeArgs {
    std::string in, out, report;
    int bits = 2;
    std::string calib = "minmax";
    double pct = 0.01;
};

int run_quantize(const QuantizeArgs& args) {
    Stopwatch clock;
    CalibrationChoice choice;
    choice.method =
        args.calib == "percentile" ? CalibrationMethod::kPercentile : CalibrationMethod::kMinMax;
    choice.percentile = args.pct;

    const NamedMatrices input = read_container(args.in);
    NamedMatrices quantized;
    quantized.reserve(input.size());
    Json spec_echo = Json::array();
    for (const auto& [name, matrix] : input) {
        const QuantSpec spec = calibrate(matrix, args.bits, choice);
        const QuantErrorNorms norms = quant_error_norms(matrix, spec);
        quantized.emplace_back(name, fake_quantize(matrix, spec).quantized);
        Json entry = to_json(name, spec);
        entry["error"] = Json{{"fro", norms.fro},
                              {"spectral", norms.spectral},
                              {"relative_fro", json_number(norms.relative_fro)}};
        spec_echo.push_back(std::move(entry));
    }
    write_container(args.out, quantized);

    Json report = report_skeleton("quantize");
    report["calibration"] = Json{{"method", args.calib}, {"percentile", args.pct}, {"bits", args.bits}};
    report["tensors"] = std::move(spec_echo);
    emit_report(std::move(report), clock.seconds(), args.report);
    return 0;
}

struct AnalyzeArgs {
    std::string weights, acts, report;
    int bits = 4;
};

int run_analyze(const AnalyzeArgs& args) {
    Stopwatch clock;
    const std::vector<LayerRecord> layers = load_layers(args.weights, args.acts);

    // The kappa shift is measured against a default conditioning run, which
    // also supplies kappa_after for the sensitivity records.
    const ConditionerConfig config;
    const std::vector<Matrix> conditioned = condition_layers(layers, config, nullptr);
    const KappaProfile kappas = kappa_profile(layers, conditioned);
    const RankProfile ranks = rank_profile(layers);

    Json report = report_skeleton("analyze");
    report["config"] = to_json(config);
    Json specs = Json::array();
    Json attribution = Json::array();
    Json sensitivity = Json::array();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& layer = layers[i];
        const QuantSpec spec_x = calibrate_minmax(layer.activation, args.bits);
        const QuantSpec spec_w = calibrate_minmax(layer.weight, args.bits);
        specs.push_back(Json{{"name", layer.name},
                             {"activation", to_json(layer.name, spec_x)},
                             {"weight", to_json(layer.name, spec_w)}});
        attribution.push_back(to_json(error_attribution(layer.activation, layer.weight, spec_x,
                                                        spec_w, layer.name)));
        SensitivityEntry bound = bound_check(layer.activation, layer.weight, spec_x, layer.name);
        bound.kappa_after = kappas.layers[i].kappa_after;
        sensitivity.push_back(to_json(bound));
    }
    report["bits"] = args.bits;
    report["quant_specs"] = std::move(specs);
    report["attribution"] = std::move(attribution);
    report["sensitivity"] = std::move(sensitivity);
    report["rank_profile"] = to_json(ranks);
    report["kappa_profile"] = to_json(kappas);
    emit_report(std::move(report), clock.seconds(), args.report);
    return 0;
}

struct SimulateArgs {
    std::uint64_t seed = 0;
    std::size_t depth = 6;
    std::size_t width = 64;
    double rank_ratio = 0.625;
    double kappa = 1e3;
    int bits = 2;
    std::string report;
};

int run_simulate(const SimulateArgs& args) {
    Stopwatch clock;
    const ToyNet net = synth_network(args.seed, args.depth, args.width, args.rank_ratio, args.kappa);
    const ConditionerConfig config;
    const CalibrationChoice calib;
    const PipelineResult result = run_pipeline(net, args.bits, config, calib);

    Json report = report_skeleton("simulate");
    report["synth"] = Json{{"seed", args.seed},
                           {"depth", args.depth},
                           {"width", args.width},
                           {"rank_ratio", args.rank_ratio},
                           {"kappa_target", args.kappa}};
    report["config"] = to_json(config);
    report["calibration"] = Json{{"method", "minmax"}, {"bits", args.bits}};

    const KappaProfile kappas = kappa_profile(net.layers, result.weights_conditioned);
    Json layers = Json::array();
    Json attribution = Json::array();
    Json sensitivity = Json::array();
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& layer = net.layers[i];
        const auto& specs = result.specs[i];
        layers.push_back(Json{{"name", layer.name},
                              {"conditioned", result.layer_reports[i].conditioned},
                              {"activation_spec", to_json(layer.name, specs.activation)},
                              {"weight_spec_baseline", to_json(layer.name, specs.weight_baseline)},
                              {"weight_spec_conditioned", to_json(layer.name, specs.weight_conditioned)},
                              {"trace", to_json(result.layer_reports[i].trace)}});
        attribution.push_back(to_json(error_attribution(layer.activation, layer.weight,
                                                        specs.activation, specs.weight_baseline,
                                                        layer.name)));
        SensitivityEntry bound = bound_check(layer.activation, layer.weight, specs.activation,
                                             layer.name);
        bound.kappa_after = kappas.layers[i].kappa_after;
        sensitivity.push_back(to_json(bound));
    }
    report["layers"] = std::move(layers);
    report["attribution"] = std::move(attribution);
    report["sensitivity"] = std::move(sensitivity);
    report["rank_profile"] = to_json(rank_profile(net.layers));
    report["kappa_profile"] = to_json(kappas);
    report["pipeline"] = Json{{"bits", result.bits},
                              {"psnr_baseline", json_number(result.psnr_fp_vs_quant_baseline)},
                              {"psnr_conditioned", json_number(result.psnr_fp_vs_quant_conditioned)},
                              {"conditioned_fp_rel_err", json_number(result.conditioned_fp_rel_err)}};
    emit_report(std::move(report), clock.seconds(), args.report);
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Condition-number-aware post-training quantization toolkit"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    ConditionArgs cond;
    auto* condition = app.add_subcommand(
        "condition", "Recondition weight matrices against calibration activations");
    condition->add_option("--weights", cond.weights, "input weights container")->required();
    condition->add_option("--acts", cond.acts, "calibration activations container")->required();
    condition->add_option("--out", cond.out, "output container for conditioned weights")->required();
    condition->add_option("--eta", cond.config.eta, "gradient step size");
    condition->add_option("--lambda", cond.config.lambda, "regularization strength");
    condition->add_option("--mu", cond.config.mu, "proximal balance");
    condition->add_option("--iters", cond.config.max_iters, "iteration count");
    condition->add_option("--target", cond.target, "shrinkage target policy")
        ->check(CLI::IsMember({"mean", "median", "midpoint"}));
    condition->add_option("--exclude", cond.exclude, "layer names to pass through unconditioned");
    condition->add_option("--report", cond.report, "report path (stdout when omitted)");

    QuantizeArgs quant;
    auto* quantize = app.add_subcommand("quantize", "Fake-quantize every matrix in a container");
    quantize->add_option("--in", quant.in, "input container")->required();
    quantize->add_option("--bits", quant.bits, "bit width")->required()->check(CLI::Range(2, 8));
    quantize->add_option("--calib", quant.calib, "bound calibration method")
        ->check(CLI::IsMember({"minmax", "percentile"}));
    quantize->add_option("--pct", quant.pct, "percentile for --calib percentile");
    quantize->add_option("--out", quant.out, "output container")->required();
    quantize->add_option("--report", quant.report, "report path (stdout when omitted)");

    AnalyzeArgs analyze;
    auto* analyze_cmd = app.add_subcommand(
        "analyze", "Error attribution, sensitivity bounds, rank and kappa profiles");
    analyze_cmd->add_option("--weights", analyze.weights, "weights container")->required();
    analyze_cmd->add_option("--acts", analyze.acts, "activations container")->required();
    analyze_cmd->add_option("--bits", analyze.bits, "bit width")->required()->check(CLI::Range(2, 8));
    analyze_cmd->add_option("--report", analyze.report, "report path")->required();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Synthetic end-to-end pipeline regression");
    simulate->add_option("--seed", sim.seed, "network seed");
    simulate->add_option("--depth", sim.depth, "layer count");
    simulate->add_option("--width", sim.width, "layer width");
    simulate->add_option("--rank-ratio", sim.rank_ratio, "activation rank ratio");
    simulate->add_option("--kappa", sim.kappa, "weight condition number target");
    simulate->add_option("--bits", sim.bits, "bit width")->check(CLI::Range(2, 8));
    simulate->add_option("--report", sim.report, "report path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (condition->parsed()) return run_condition(cond);
        if (quantize->parsed()) return run_quantize(quant);
        if (analyze_cmd->parsed()) return run_analyze(analyze);
        if (simulate->parsed()) return run_simulate(sim);
        std::cerr << "no subcommand given" << std::endl;
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
}

}  // namespace cq
