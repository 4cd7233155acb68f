#include "rmpower/report.hpp"

#include <fmt/format.h>

namespace rmpower::report {

namespace {

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return field<T>(j, key);
}

// Degrees of freedom: integers print bare, fractional values with 4 decimals.
std::string format_df(double df) {
  if (df == std::floor(df) && std::fabs(df) < 1e15) return fmt::format("{:.0f}", df);
  return format_num(df, 4);
}

}  // namespace

std::string canonical(const json& doc) { return doc.dump(2) + "\n"; }

json to_json(const NoncentralitySpec& s) { return {{"lambda", s.lambda}, {"df1", s.df1}, {"df2", s.df2}}; }

json to_json(const PowerResult& r) {
  return {{"power", r.power}, {"crit_f", r.crit_f}, {"noncentrality", to_json(r.spec)}};
}

json to_json(const CurveTable& c) {
  json rows = json::array();
  for (const auto& r : c.rows) rows.push_back({{"f", r.f}, {"n_total", r.n_total}, {"power", r.power}});
  return {{"kind", std::string(to_string(c.kind))}, {"rows", rows}, {"warnings", c.warnings}};
}

json to_json(const AnovaRow& r) {
  json j = {{"source", std::string(to_string(r.source))}, {"ss", r.ss}, {"df", r.df}, {"ms", r.ms}};
  if (r.f) j["f"] = *r.f;
  if (r.p) j["p"] = *r.p;
  if (r.df_error) j["df_error"] = *r.df_error;
  json adj = json::array();
  for (const auto& a : r.adjusted)
    adj.push_back({{"method", a.method}, {"epsilon", a.epsilon}, {"df1", a.df1}, {"df2", a.df2}, {"p", a.p}});
  j["adjusted"] = adj;
  return j;
}

json to_json(const SphericityReport& s) {
  return {{"mauchly_w", s.mauchly_w}, {"chisq", s.chisq}, {"df", s.df},
          {"p", s.p},                 {"eps_gg", s.eps_gg}, {"eps_hf", s.eps_hf},
          {"eps_hf_raw", s.eps_hf_raw}, {"eps_lower_bound", s.eps_lower_bound}};
}

json to_json(const AnovaTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) rows.push_back(to_json(r));
  json j = {{"groups", t.groups}, {"subjects", t.subjects}, {"times", t.times}, {"ss_total", t.ss_total},
            {"rows", rows}};
  if (t.sphericity) j["sphericity"] = to_json(*t.sphericity);
  return j;
}

json to_json(const FriedmanResult& f) { return {{"statistic", f.statistic}, {"df", f.df}, {"p", f.p}}; }

json to_json(const mc::MCPowerEstimate& e) {
  return {{"rejection_rate", e.rejection_rate}, {"std_error", e.std_error},
          {"analytic_power", e.analytic_power}, {"z_discrepancy", e.z_discrepancy},
          {"replications", e.replications},     {"rejections", e.rejections}};
}

PowerResult power_result_from_json(const json& j) {
  PowerResult r;
  r.power = field<double>(j, "power");
  r.crit_f = field<double>(j, "crit_f");
  const json& nc = field<json>(j, "noncentrality");
  r.spec = {field<double>(nc, "lambda"), field<double>(nc, "df1"), field<double>(nc, "df2")};
  return r;
}

AnovaTable anova_table_from_json(const json& j) {
  AnovaTable t;
  t.groups = field<std::size_t>(j, "groups");
  t.subjects = field<std::size_t>(j, "subjects");
  t.times = field<std::size_t>(j, "times");
  t.ss_total = field<double>(j, "ss_total");
  for (const auto& rj : field<json>(j, "rows")) {
    AnovaRow r;
    r.source = parse_source(field<std::string>(rj, "source"));
    r.ss = field<double>(rj, "ss");
    r.df = field<double>(rj, "df");
    r.ms = field<double>(rj, "ms");
    r.f = optional_field<double>(rj, "f");
    r.p = optional_field<double>(rj, "p");
    r.df_error = optional_field<double>(rj, "df_error");
    if (rj.contains("adjusted"))
      for (const auto& aj : rj.at("adjusted"))
        r.adjusted.push_back({field<std::string>(aj, "method"), field<double>(aj, "epsilon"),
                              field<double>(aj, "df1"), field<double>(aj, "df2"), field<double>(aj, "p")});
    t.rows.push_back(std::move(r));
  }
  if (j.contains("sphericity") && !j.at("sphericity").is_null()) {
    const json& s = j.at("sphericity");
    SphericityReport sr;
    sr.mauchly_w = field<double>(s, "mauchly_w");
    sr.chisq = field<double>(s, "chisq");
    sr.df = field<int>(s, "df");
    sr.p = field<double>(s, "p");
    sr.eps_gg = field<double>(s, "eps_gg");
    sr.eps_hf = field<double>(s, "eps_hf");
    sr.eps_hf_raw = field<double>(s, "eps_hf_raw");
    sr.eps_lower_bound = field<double>(s, "eps_lower_bound");
    t.sphericity = sr;
  }
  return t;
}

FriedmanResult friedman_from_json(const json& j) {
  return {field<double>(j, "statistic"), field<int>(j, "df"), field<double>(j, "p")};
}

mc::MCPowerEstimate mc_estimate_from_json(const json& j) {
  mc::MCPowerEstimate e;
  e.rejection_rate = field<double>(j, "rejection_rate");
  e.std_error = field<double>(j, "std_error");
  e.analytic_power = field<double>(j, "analytic_power");
  e.z_discrepancy = field<double>(j, "z_discrepancy");
  e.replications = field<long>(j, "replications");
  e.rejections = field<long>(j, "rejections");
  return e;
}

json error_json(const Error& e) {
  json err = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
    err["issue"] = std::string(to_string(v->issue()));
    if (v->group()) err["group"] = *v->group();
    if (v->row()) err["row"] = *v->row();
    if (v->column()) err["column"] = *v->column();
  }
  if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
    if (p->line() > 0) err["line"] = p->line();
    if (p->column() > 0) err["column"] = p->column();
  }
  return {{"schema_version", kSchemaVersion}, {"type", "error"}, {"error", err}};
}

std::string format_num(double v, int decimals) { return fmt::format("{:.{}f}", v, decimals); }

std::string format_f(double f) { return format_num(f, 4); }

std::string format_p(double p) {
  // anything that would print as 0.000
  if (p < 0.0005) return "<0.001";
  return format_num(p, 3);
}

namespace {

std::string p_clause(double p) {
  const std::string s = format_p(p);
  return s.front() == '<' ? "p < " + s.substr(1) : "p = " + s;
}

std::string design_line(const json& req) {
  return fmt::format("test: {}  g={}  t={}", req.at("kind").get<std::string>(), req.at("g").get<int>(),
                     req.at("t").get<int>());
}

std::string noncentrality_line(const json& r) {
  const json& nc = r.at("noncentrality");
  return fmt::format("lambda = {}, df = ({}, {}), critical F = {}\n", format_num(nc.at("lambda").get<double>()),
                     format_df(nc.at("df1").get<double>()), format_df(nc.at("df2").get<double>()),
                     format_f(r.at("crit_f").get<double>()));
}

}  // namespace

std::string render_power(const json& report) {
  const json& req = report.at("request");
  std::string out = fmt::format("power = {}\n", format_num(report.at("power").get<double>()));
  out += design_line(req) + fmt::format("  N={}\n", req.at("n").get<long>());
  out += noncentrality_line(report);
  return out;
}

std::string render_nsize(const json& report) {
  const json& req = report.at("request");
  std::string out = fmt::format("N = {}\n", report.at("n_total").get<long>());
  out += fmt::format("achieved power = {}\n", format_num(report.at("achieved_power").get<double>()));
  out += design_line(req) + "\n";
  out += noncentrality_line(report);
  const json& integer = report.at("integer_search");
  if (integer.at("n_total").get<long>() != report.at("n_total").get<long>())
    out += fmt::format(
        "note: N is searched over multiples of g={}; an unrestricted integer search gives N = {} (power {})\n",
        req.at("g").get<int>(), integer.at("n_total").get<long>(),
        format_num(integer.at("achieved_power").get<double>()));
  return out;
}

std::string render_mde(const json& report) {
  std::string out = fmt::format("f = {}\n", format_num(report.at("f").get<double>()));
  out += fmt::format("power at f = {}\n", format_num(report.at("achieved_power").get<double>(), 6));
  out += design_line(report.at("request")) + fmt::format("  N={}\n", report.at("request").at("n").get<long>());
  return out;
}

std::string render_curve(const json& report) {
  std::string out = fmt::format("{:>8} {:>8} {:>8}\n", "f", "N", "power");
  for (const auto& r : report.at("curve").at("rows"))
    out += fmt::format("{:>8} {:>8} {:>8}\n", format_num(r.at("f").get<double>(), 3), r.at("n_total").get<long>(),
                       format_num(r.at("power").get<double>()));
  for (const auto& w : report.at("curve").at("warnings")) out += "warning: " + w.get<std::string>() + "\n";
  return out;
}

std::string render_anova(const json& report) {
  const AnovaTable t = anova_table_from_json(report);
  std::string out = fmt::format("Repeated-measures ANOVA: {} group(s), {} subjects, {} time points\n\n", t.groups,
                                t.subjects, t.times);
  out += fmt::format("{:<16}{:>12}{:>10}{:>12}{:>10}{:>9}\n", "Source", "SS", "df", "MS", "F", "p");
  for (const auto& r : t.rows) {
    const std::string name = (t.groups == 1 && r.source == Source::Subject) ? "Subject" : std::string(to_string(r.source));
    out += fmt::format("{:<16}{:>12}{:>10}{:>12}{:>10}{:>9}\n", name, format_num(r.ss), format_df(r.df),
                       format_num(r.ms), r.f ? format_f(*r.f) : "", r.p ? format_p(*r.p) : "");
    for (const auto& a : r.adjusted)
      out += fmt::format("  {} (eps={}): df = ({}, {}), {}\n", a.method, format_num(a.epsilon),
                         format_df(a.df1), format_df(a.df2), p_clause(a.p));
  }
  if (t.sphericity) {
    const auto& s = *t.sphericity;
    out += fmt::format("\nMauchly W = {}, chi2({}) = {}, {}\n", format_num(s.mauchly_w), s.df,
                       format_num(s.chisq), p_clause(s.p));
    out += fmt::format("epsilon: GG = {}, HF = {}, lower bound = {}\n", format_num(s.eps_gg), format_num(s.eps_hf),
                       format_num(s.eps_lower_bound));
  }
  if (report.contains("friedman")) {
    const FriedmanResult f = friedman_from_json(report.at("friedman"));
    out += fmt::format("\nFriedman Q = {}, df = {}, {}\n", format_num(f.statistic), f.df, p_clause(f.p));
  }
  return out;
}

std::string render_simulate(const json& report) {
  const mc::MCPowerEstimate e = mc_estimate_from_json(report);
  std::string out = fmt::format("rejection rate = {} ({} of {} replicates, SE {})\n", format_num(e.rejection_rate),
                                e.rejections, e.replications, format_num(e.std_error));
  out += fmt::format("analytic power = {}\n", format_num(e.analytic_power));
  out += fmt::format("z discrepancy = {}\n", format_num(e.z_discrepancy, 3));
  return out;
}

}  // namespace rmpower::report
