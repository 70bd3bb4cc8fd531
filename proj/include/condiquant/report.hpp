#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "condiquant/analysis.hpp"
#include "condiquant/conditioner.hpp"
#include "condiquant/harness.hpp"
#include "condiquant/quantizer.hpp"

namespace cq {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

/// Finite values serialize as numbers; infinities as the strings "inf" /
/// "-inf" so reports stay valid JSON.
Json json_number(double v);
Json json_number(const std::optional<double>& v);

Json to_json(const ConditionerConfig& config);
Json to_json(const std::string& name, const QuantSpec& spec);
Json to_json(const ConditionerTrace& trace);
Json to_json(const AttributionEntry& entry);
Json to_json(const SensitivityEntry& entry);
Json to_json(const RankProfile& profile);
Json to_json(const KappaProfile& profile);

/// Common envelope: schema_version, tool_version, command.
Json report_skeleton(const std::string& command);

/// Appends wall_clock_seconds and writes the report to `path`, or to stdout
/// when path is empty.
void emit_report(Json report, double wall_clock_seconds, const std::string& path);

}  // namespace cq
