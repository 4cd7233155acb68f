#pragma once

#include <filesystem>
#include <string>

#include "rmpower/power.hpp"

namespace rmpower::svg {

/// Standalone SVG: N on the x axis, power in [0, 1] on the y axis, one
/// polyline per effect size with a legend. Single-point series are drawn as
/// markers.
std::string render_curve_svg(const CurveTable& curve);

/// Writes the SVG to `svg_path` and the curve CSV next to it (same stem,
/// `.csv` extension). Returns the CSV path.
std::filesystem::path emit_curve_svg(const CurveTable& curve, const std::filesystem::path& svg_path);

}  // namespace rmpower::svg
