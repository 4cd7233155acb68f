#pragma once

// Versioned JSON reports and plain-text rendering.
//
// Every report is a flat JSON object carrying `schema_version`, `type` and
// the normalized `request`, plus the result fields. Serialization is
// canonical (sorted keys, two-space indent, shortest round-trip doubles), so
// parse -> dump reproduces the same bytes.

#include <optional>
#include <string>

#include <json.hpp>

#include "rmpower/errors.hpp"
#include "rmpower/mcvalidate.hpp"
#include "rmpower/power.hpp"
#include "rmpower/rmanova.hpp"

namespace rmpower::report {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

std::string canonical(const json& doc);

// Result structs <-> JSON. from_json throws ParseError on shape mismatches.
json to_json(const NoncentralitySpec& s);
json to_json(const PowerResult& r);
json to_json(const CurveTable& c);
json to_json(const AnovaRow& r);
json to_json(const SphericityReport& s);
json to_json(const AnovaTable& t);
json to_json(const FriedmanResult& f);
json to_json(const mc::MCPowerEstimate& e);

PowerResult power_result_from_json(const json& j);
AnovaTable anova_table_from_json(const json& j);
FriedmanResult friedman_from_json(const json& j);
mc::MCPowerEstimate mc_estimate_from_json(const json& j);

json error_json(const Error& e);

// Text rendering. F uses four decimals; p uses three, or "<0.001".
std::string format_f(double f);
std::string format_p(double p);
std::string format_num(double v, int decimals = 4);

std::string render_power(const json& report);
std::string render_nsize(const json& report);
std::string render_mde(const json& report);
std::string render_curve(const json& report);
std::string render_anova(const json& report);
std::string render_simulate(const json& report);

}  // namespace rmpower::report
