#include "rmpower/cli.hpp"

#include <iostream>
#include <iterator>
#include <limits>
#include <optional>

#include <CLI11.hpp>

#include "rmpower/api.hpp"
#include "rmpower/csv.hpp"
#include "rmpower/http.hpp"
#include "rmpower/svg.hpp"

namespace rmpower::cli {

namespace {

using json = nlohmann::json;

struct PlanningFlags {
  std::string kind = "between";
  std::optional<int> groups;
  std::optional<int> times;
  std::optional<long> n;
  std::optional<double> f, rho, eps, alpha, power;
};

enum Fields : unsigned { kWithN = 1, kWithF = 2, kWithPower = 4 };

void add_planning(CLI::App* sub, PlanningFlags& p, unsigned fields) {
  sub->add_option("--kind", p.kind, "between | within | interaction")
      ->check(CLI::IsMember({"between", "within", "interaction"}))
      ->capture_default_str();
  sub->add_option("--groups,-g", p.groups, "number of groups g")->required();
  sub->add_option("--times,-t", p.times, "number of time points t")->required();
  if (fields & kWithN) sub->add_option("--n", p.n, "total sample size N")->required();
  if (fields & kWithF) sub->add_option("--f", p.f, "Cohen's f (default 0.25)");
  sub->add_option("--rho", p.rho, "correlation among repeated measures (default 0.5)");
  sub->add_option("--eps", p.eps, "nonsphericity correction epsilon (default 1)");
  sub->add_option("--alpha", p.alpha, "significance level (default 0.05)");
  if (fields & kWithPower) sub->add_option("--power", p.power, "target power (default 0.8)");
}

json planning_request(const PlanningFlags& p) {
  json j = {{"kind", p.kind}, {"g", *p.groups}, {"t", *p.times}};
  if (p.n) j["n"] = *p.n;
  if (p.f) j["f"] = *p.f;
  if (p.rho) j["rho"] = *p.rho;
  if (p.eps) j["eps"] = *p.eps;
  if (p.alpha) j["alpha"] = *p.alpha;
  if (p.power) j["power"] = *p.power;
  return j;
}

std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  return io::read_file(path);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Power analysis, sample size and repeated-measures ANOVA", "rmpower"};
  app.require_subcommand(1);
  app.fallthrough();
  bool as_json = false;
  app.add_flag("--json", as_json, "print the canonical JSON report instead of text");

  PlanningFlags plan;

  auto* power_cmd = app.add_subcommand("power", "power of the F test at a given N");
  add_planning(power_cmd, plan, kWithN | kWithF);

  auto* nsize_cmd = app.add_subcommand("nsize", "smallest total N reaching the target power");
  add_planning(nsize_cmd, plan, kWithF | kWithPower);
  std::optional<long> max_n;
  nsize_cmd->add_option("--max-n", max_n, "upper bound for the search (default 1000000)");

  auto* mde_cmd = app.add_subcommand("mde", "smallest f reaching the target power at a given N");
  add_planning(mde_cmd, plan, kWithN | kWithPower);

  auto* curve_cmd = app.add_subcommand("curve", "power over a grid of N for several effect sizes");
  add_planning(curve_cmd, plan, 0);
  std::vector<double> f_values;
  std::optional<long> n_min, n_max, n_step;
  std::string curve_out, curve_svg;
  curve_cmd->add_option("--f-values", f_values, "effect sizes (default 0.1,0.25,0.4)")->delimiter(',');
  curve_cmd->add_option("--n-min", n_min, "first N (default 2g)");
  curve_cmd->add_option("--n-max", n_max, "last N (default 200)");
  curve_cmd->add_option("--n-step", n_step, "N increment (default g)");
  curve_cmd->add_option("--out,-o", curve_out, "write the curve as CSV");
  curve_cmd->add_option("--svg", curve_svg, "write an SVG plot (and a CSV with the same stem)");

  auto* anova_cmd = app.add_subcommand("anova", "repeated-measures ANOVA on a CSV file");
  api::AnovaRequest anova_req;
  std::string anova_path;
  anova_cmd->add_option("file", anova_path, "wide CSV (group,subject,<times>...) or '-' for stdin")->required();
  anova_cmd->add_flag("--gg", anova_req.greenhouse_geisser, "Greenhouse-Geisser adjusted p-values");
  anova_cmd->add_flag("--hf", anova_req.huynh_feldt, "Huynh-Feldt adjusted p-values");
  anova_cmd->add_flag("--friedman", anova_req.friedman, "add the Friedman rank test (single group)");
  anova_cmd->add_flag("--long", anova_req.long_format, "input is long format (group,subject,time,value)");

  auto* convert_cmd = app.add_subcommand("convert", "convert a long-format CSV to the wide layout");
  std::string convert_in, convert_out;
  convert_cmd->add_option("file", convert_in, "long CSV or '-' for stdin")->required();
  convert_cmd->add_option("--out,-o", convert_out, "output path (default stdout)");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo rejection rate against analytic power");
  add_planning(sim_cmd, plan, kWithN | kWithF);
  std::optional<long> reps;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  sim_cmd->add_option("--reps", reps, "replications (default 10000)");
  sim_cmd->add_option("--seed", seed, "base seed");
  sim_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto* serve_cmd = app.add_subcommand("serve", "run the local HTTP API");
  http::ServeOptions serve;
  serve.port = http::default_port();
  serve_cmd->add_option("--port", serve.port, "port (RMPOWER_PORT, default 8707; 0 = any free port)")
      ->check(CLI::Range(0, 65535))
      ->capture_default_str();
  serve_cmd->add_option("--bind", serve.bind, "interface to bind")->capture_default_str();
  serve_cmd->add_option("--ui-dir", serve.ui_dir, "static UI bundle served at /");
  serve_cmd->add_option("--max-reps", serve.limits.max_replications, "cap on simulate replications")
      ->capture_default_str();
  serve_cmd->add_option("--threads", serve.limits.threads, "simulation worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto emit = [&](const json& report, std::string (*render)(const json&)) {
    out << (as_json ? report::canonical(report) : render(report));
  };

  try {
    if (power_cmd->parsed()) {
      emit(api::power(planning_request(plan)), report::render_power);
    } else if (nsize_cmd->parsed()) {
      json req = planning_request(plan);
      if (max_n) req["max_n"] = *max_n;
      emit(api::nsize(req), report::render_nsize);
    } else if (mde_cmd->parsed()) {
      emit(api::mde(planning_request(plan)), report::render_mde);
    } else if (curve_cmd->parsed()) {
      json req = planning_request(plan);
      if (!f_values.empty()) req["f_values"] = f_values;
      if (n_min) req["n_min"] = *n_min;
      if (n_max) req["n_max"] = *n_max;
      if (n_step) req["n_step"] = *n_step;
      const json rep = api::curve(req);
      const CurveTable table = [&] {
        CurveTable t;
        t.kind = parse_test_kind(rep.at("request").at("kind").get<std::string>());
        for (const auto& r : rep.at("curve").at("rows"))
          t.rows.push_back({r.at("f").get<double>(), r.at("n_total").get<long>(), r.at("power").get<double>()});
        return t;
      }();
      if (!curve_out.empty()) io::write_file(curve_out, io::curve_to_csv(table));
      if (!curve_svg.empty()) {
        const auto csv_path = svg::emit_curve_svg(table, curve_svg);
        if (!as_json) err << "wrote " << curve_svg << " and " << csv_path.string() << "\n";
      }
      emit(rep, report::render_curve);
    } else if (anova_cmd->parsed()) {
      anova_req.csv = read_input(anova_path);
      emit(api::anova(anova_req), report::render_anova);
    } else if (convert_cmd->parsed()) {
      const std::string wide = io::to_wide_csv(io::parse_long_csv(read_input(convert_in)));
      if (convert_out.empty())
        out << wide;
      else
        io::write_file(convert_out, wide);
    } else if (sim_cmd->parsed()) {
      json req = planning_request(plan);
      if (reps) req["reps"] = *reps;
      if (seed) req["seed"] = *seed;
      api::ServiceLimits limits;
      limits.max_replications = std::numeric_limits<long>::max();
      limits.threads = threads;
      emit(api::simulate(req, limits), report::render_simulate);
    } else if (serve_cmd->parsed()) {
      http::Server server(serve);
      const int port = server.bind();
      out << "rmpower listening on http://" << serve.bind << ":" << port << "\n" << std::flush;
      server.run();
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCompute;
  }
  return kExitOk;
}

}  // namespace rmpower::cli
