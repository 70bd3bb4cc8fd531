#include "condiquant/report.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include "condiquant/errors.hpp"

namespace cq {

Json json_number(double v) {
    if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
    return Json(v);
}

Json json_number(const std::optional<double>& v) {
    return v.has_value() ? json_number(*v) : Json(nullptr);
}

Json to_json(const ConditionerConfig& config) {
    return Json{{"eta", config.eta},
                {"lambda", config.lambda},
                {"mu", config.mu},
                {"max_iters", config.max_iters},
                {"target_policy", to_string(config.target_policy)}};
}

Json to_json(const std::string& name, const QuantSpec& spec) {
    return Json{{"name", name},
                {"bits", spec.bits},
                {"lower", spec.lower},
                {"upper", spec.upper},
                {"scale", spec.scale()}};
}

Json to_json(const ConditionerTrace& trace) {
    Json arr = Json::array();
    for (const auto& entry : trace) {
        arr.push_back(Json{{"iter", entry.iter},
                           {"kappa", json_number(entry.kappa)},
                           {"output_rel_err", json_number(entry.output_rel_err)},
                           {"objective", json_number(entry.objective)}});
    }
    return arr;
}

Json to_json(const AttributionEntry& entry) {
    return Json{{"name", entry.name},
                {"exact", entry.exact},
                {"weight_only", entry.weight_only},
                {"act_only", entry.act_only},
                {"second_order", entry.second_order}};
}

Json to_json(const SensitivityEntry& entry) {
    return Json{{"name", entry.name},
                {"kappa_before", json_number(entry.kappa_before)},
                {"kappa_after", json_number(entry.kappa_after)},
                {"applicable", entry.applicable},
                {"observed_lhs", json_number(entry.observed_lhs)},
                {"bound_rhs", json_number(entry.bound_rhs)},
                {"rank_ratio", entry.rank_ratio}};
}

Json to_json(const RankProfile& profile) {
    Json layers = Json::array();
    for (const auto& entry : profile.layers) {
        Json item{{"name", entry.name}};
        if (entry.error.has_value()) {
            item["error"] = *entry.error;
        } else {
            item["rank"] = entry.rank;
            item["rank_ratio"] = entry.ratio;
        }
        layers.push_back(std::move(item));
    }
    return Json{{"layers", std::move(layers)}, {"mean_ratio", profile.mean_ratio}};
}

Json to_json(const KappaProfile& profile) {
    Json layers = Json::array();
    for (const auto& entry : profile.layers) {
        layers.push_back(Json{{"name", entry.name},
                              {"kappa_before", json_number(entry.kappa_before)},
                              {"kappa_after", json_number(entry.kappa_after)}});
    }
    return Json{{"layers", std::move(layers)},
                {"mean_before", json_number(profile.mean_before)},
                {"mean_after", json_number(profile.mean_after)},
                {"infinite_before", profile.infinite_before},
                {"infinite_after", profile.infinite_after}};
}

Json report_skeleton(const std::string& command) {
    return Json{{"schema_version", kSchemaVersion}, {"tool_version", kToolVersion}, {"command", command}};
}

void emit_report(Json report, double wall_clock_seconds, const std::string& path) {
    report["wall_clock_seconds"] = wall_clock_seconds;
    const std::string text = report.dump(2);
    if (path.empty()) {
        std::cout << text << std::endl;
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open report path '" + path + "' for writing");
    out << text << '\n';
    if (!out) throw FormatError("write failed for report path '" + path + "'");
}

}  // namespace cq
