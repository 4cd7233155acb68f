#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "rmpower/power.hpp"
#include "rmpower/rmanova.hpp"

namespace rmpower::io {

/// Wide layout: header `group,subject,<time label>...`, one row per subject.
/// Group blocks keep order of first appearance. Empty or `NA` cells parse
/// as missing and are rejected by dataset validation.
RMDataset parse_wide_csv(std::string_view text);

/// Long layout: header `group,subject,time,value`, one row per measurement.
RMDataset parse_long_csv(std::string_view text);

std::string to_wide_csv(const RMDataset& data);

/// `f,n_total,power` with round-trip precision.
std::string curve_to_csv(const CurveTable& curve);
CurveTable parse_curve_csv(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace rmpower::io
