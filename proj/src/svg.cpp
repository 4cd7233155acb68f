#include "rmpower/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "rmpower/csv.hpp"
#include "rmpower/errors.hpp"

namespace rmpower::svg {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string trim_num(double v) { return fmt::format("{:g}", v); }

double nice_step(double span, int target_ticks) {
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string render_curve_svg(const CurveTable& curve) {
  if (curve.rows.empty()) throw Error(ErrorKind::InvalidDesign, "cannot plot an empty power curve");

  // series keyed by f, in first-appearance order
  std::vector<double> order;
  std::map<double, std::vector<const CurveRow*>> series;
  for (const auto& r : curve.rows) {
    if (!series.contains(r.f)) order.push_back(r.f);
    series[r.f].push_back(&r);
  }
  long n_lo = curve.rows.front().n_total, n_hi = n_lo;
  for (const auto& r : curve.rows) {
    n_lo = std::min(n_lo, r.n_total);
    n_hi = std::max(n_hi, r.n_total);
  }
  double x_lo = static_cast<double>(n_lo), x_hi = static_cast<double>(n_hi);
  if (x_hi == x_lo) {
    x_lo -= 1.0;
    x_hi += 1.0;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double n) { return kLeft + (n - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double p) { return kTop + (1.0 - p) * plot_h; };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight);
  out += fmt::format("<title>Power curves ({} test)</title>\n", to_string(curve.kind));
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);

  // axes and grid
  out += "<g class=\"axes\" stroke=\"#444\" stroke-width=\"1\">\n";
  out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\"/>\n", kLeft, py(0.0), kLeft + plot_w);
  out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\"/>\n", kLeft, py(0.0), py(1.0));
  out += "</g>\n<g class=\"ticks\" fill=\"#222\">\n";
  for (int i = 0; i <= 10; i += 2) {
    const double p = i / 10.0;
    out += fmt::format("<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#ddd\"/>\n", kLeft, py(p),
                       kLeft + plot_w);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6, py(p) + 4,
                       trim_num(p));
  }
  const double step = nice_step(x_hi - x_lo, 8);
  for (double n = std::ceil(x_lo / step) * step; n <= x_hi + 1e-9; n += step)
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", px(n), py(0.0) + 18,
                       trim_num(n));
  out += "</g>\n";
  out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">Total sample size N</text>\n",
                     kLeft + plot_w / 2, kHeight - 15);
  out += fmt::format(
      "<text x=\"18\" y=\"{0:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.2f})\">Power (1 - beta)"
      "</text>\n",
      kTop + plot_h / 2);

  // series
  for (std::size_t s = 0; s < order.size(); ++s) {
    const double f = order[s];
    const char* color = kPalette[s % kPalette.size()];
    const auto& pts = series[f];
    if (pts.size() == 1) {
      out += fmt::format("<circle class=\"marker\" data-f=\"{}\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"{}\"/>\n",
                         trim_num(f), px(static_cast<double>(pts[0]->n_total)), py(pts[0]->power), color);
    } else {
      std::string points;
      for (const auto* r : pts)
        points += fmt::format("{}{:.2f},{:.2f}", points.empty() ? "" : " ", px(static_cast<double>(r->n_total)),
                              py(r->power));
      out += fmt::format("<polyline data-f=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
                         trim_num(f), color, points);
    }
    const double ly = kTop + 10 + 20.0 * static_cast<double>(s);
    const double lx = kWidth - kRight + 20;
    out += fmt::format("<g class=\"legend\"><line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" "
                       "stroke-width=\"2\"/><text x=\"{4}\" y=\"{5}\">f={6}</text></g>\n",
                       lx, ly, lx + 24, color, lx + 30, ly + 4, trim_num(f));
  }
  out += "</svg>\n";
  return out;
}

std::filesystem::path emit_curve_svg(const CurveTable& curve, const std::filesystem::path& svg_path) {
  io::write_file(svg_path, render_curve_svg(curve));
  std::filesystem::path csv_path = svg_path;
  csv_path.replace_extension(".csv");
  io::write_file(csv_path, io::curve_to_csv(curve));
  return csv_path;
}

}  // namespace rmpower::svg
