#include "rmpower/api.hpp"

#include <cmath>
#include <set>

#include "rmpower/csv.hpp"
#include "rmpower/svg.hpp"

namespace rmpower::api {

namespace {

struct Planning {
  TestKind kind = TestKind::BetweenGroups;
  StudyDesign design;
  EffectSpec eff;
};

void reject_unknown_keys(const json& req, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : req.items())
    if (!ok.contains(key)) throw ParseError("unknown request field '" + key + "'");
}

double number(const json& req, const char* key, double fallback) {
  if (!req.contains(key) || req.at(key).is_null()) return fallback;
  const json& v = req.at(key);
  if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

long integer(const json& req, const char* key, std::optional<long> fallback) {
  if (!req.contains(key) || req.at(key).is_null()) {
    if (!fallback) throw ParseError(std::string("missing required field '") + key + "'");
    return *fallback;
  }
  const json& v = req.at(key);
  if (!v.is_number() || v.get<double>() != std::floor(v.get<double>()))
    throw ParseError(std::string("field '") + key + "' must be an integer");
  return v.get<long>();
}

const json& as_object(const json& req) {
  if (!req.is_object()) throw ParseError("request body must be a JSON object");
  return req;
}

Planning parse_planning(const json& req, bool need_n) {
  Planning p;
  if (req.contains("kind")) {
    if (!req.at("kind").is_string()) throw ParseError("field 'kind' must be a string");
    p.kind = parse_test_kind(req.at("kind").get<std::string>());
  }
  p.design.groups = static_cast<int>(integer(req, "g", std::nullopt));
  p.design.times = static_cast<int>(integer(req, "t", std::nullopt));
  p.design.n_total = need_n ? integer(req, "n", std::nullopt) : 0;
  const EffectSpec defaults;
  p.eff.f = number(req, "f", defaults.f);
  p.eff.rho = number(req, "rho", defaults.rho);
  p.eff.epsilon = number(req, "eps", defaults.epsilon);
  p.eff.alpha = number(req, "alpha", defaults.alpha);
  p.eff.target_power = number(req, "power", defaults.target_power);
  return p;
}

json echo(const Planning& p, bool with_n, bool with_f, bool with_target) {
  json j = {{"kind", std::string(to_string(p.kind))},
            {"g", p.design.groups},
            {"t", p.design.times},
            {"rho", p.eff.rho},
            {"eps", p.kind == TestKind::BetweenGroups ? 1.0 : p.eff.epsilon},
            {"alpha", p.eff.alpha}};
  if (with_n) j["n"] = p.design.n_total;
  if (with_f) j["f"] = p.eff.f;
  if (with_target) j["power"] = p.eff.target_power;
  return j;
}

json envelope(const char* type, json request) {
  return {{"schema_version", report::kSchemaVersion}, {"type", type}, {"request", std::move(request)}};
}

void merge(json& into, const json& from) {
  for (const auto& [k, v] : from.items()) into[k] = v;
}

}  // namespace

json power(const json& request) {
  const json& req = as_object(request);
  reject_unknown_keys(req, {"kind", "g", "t", "n", "f", "rho", "eps", "alpha", "power"});
  const Planning p = parse_planning(req, true);
  const PowerResult r = compute_power(p.kind, p.design, p.eff);
  json out = envelope("power", echo(p, true, true, false));
  merge(out, report::to_json(r));
  return out;
}

json nsize(const json& request) {
  const json& req = as_object(request);
  reject_unknown_keys(req, {"kind", "g", "t", "f", "rho", "eps", "alpha", "power", "max_n"});
  const Planning p = parse_planning(req, false);
  SolverOptions opts;
  opts.max_total_n = integer(req, "max_n", opts.max_total_n);
  const SampleSizeResult r = required_sample_size(p.kind, p.design, p.eff, opts);
  StudyDesign at = p.design;
  at.n_total = r.n_total;
  const PowerResult detail = compute_power(p.kind, at, p.eff);
  json out = envelope("nsize", echo(p, false, true, true));
  out["n_total"] = r.n_total;
  out["achieved_power"] = r.achieved_power;
  out["step"] = p.design.groups;
  out["integer_search"] = {{"n_total", r.integer_n_total}, {"achieved_power", r.integer_power}};
  out["crit_f"] = detail.crit_f;
  out["noncentrality"] = report::to_json(detail.spec);
  return out;
}

json mde(const json& request) {
  const json& req = as_object(request);
  reject_unknown_keys(req, {"kind", "g", "t", "n", "rho", "eps", "alpha", "power"});
  Planning p = parse_planning(req, true);
  const double f = minimal_detectable_effect(p.kind, p.design, p.eff);
  json out = envelope("mde", echo(p, true, false, true));
  p.eff.f = f;
  const PowerResult detail = compute_power(p.kind, p.design, p.eff);
  out["f"] = f;
  out["achieved_power"] = detail.power;
  out["crit_f"] = detail.crit_f;
  out["noncentrality"] = report::to_json(detail.spec);
  return out;
}

json curve(const json& request) {
  const json& req = as_object(request);
  reject_unknown_keys(req, {"kind", "g", "t", "rho", "eps", "alpha", "f_values", "n_min", "n_max", "n_step", "render"});
  const Planning p = parse_planning(req, false);
  std::vector<double> f_values = {0.1, 0.25, 0.4};
  if (req.contains("f_values")) {
    const json& fv = req.at("f_values");
    if (!fv.is_array()) throw ParseError("field 'f_values' must be an array of numbers");
    f_values.clear();
    for (const auto& v : fv) {
      if (!v.is_number()) throw ParseError("field 'f_values' must be an array of numbers");
      f_values.push_back(v.get<double>());
    }
  }
  const long g = p.design.groups;
  const long n_min = integer(req, "n_min", 2 * g);
  const long n_max = integer(req, "n_max", std::max(n_min, 200L));
  const long n_step = integer(req, "n_step", g);
  bool render = false;
  if (req.contains("render")) {
    if (!req.at("render").is_boolean()) throw ParseError("field 'render' must be a boolean");
    render = req.at("render").get<bool>();
  }
  const CurveTable table = power_curve(p.kind, p.design, p.eff, f_values, n_grid(n_min, n_max, n_step));

  json echo_req = echo(p, false, false, false);
  echo_req["f_values"] = f_values;
  echo_req["n_min"] = n_min;
  echo_req["n_max"] = n_max;
  echo_req["n_step"] = n_step;
  json out = envelope("curve", echo_req);
  out["curve"] = report::to_json(table);
  if (render) {
    out["svg"] = svg::render_curve_svg(table);
    out["csv"] = io::curve_to_csv(table);
  }
  return out;
}

json simulate(const json& request, const ServiceLimits& limits) {
  const json& req = as_object(request);
  reject_unknown_keys(req, {"kind", "g", "t", "n", "f", "rho", "eps", "alpha", "reps", "seed"});
  const Planning p = parse_planning(req, true);
  mc::SimSpec spec;
  spec.kind = p.kind;
  spec.design = p.design;
  spec.eff = p.eff;
  spec.replications = integer(req, "reps", 10000L);
  if (req.contains("seed")) {
    const json& s = req.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0))
      throw ParseError("field 'seed' must be a nonnegative integer");
    spec.seed = s.get<std::uint64_t>();
  }
  if (spec.replications > limits.max_replications)
    throw Error(ErrorKind::InvalidDesign, "replications " + std::to_string(spec.replications) +
                                              " exceed the service cap of " + std::to_string(limits.max_replications));
  const mc::MCPowerEstimate est = mc::estimate_power_mc(spec, limits.threads);
  json echo_req = echo(p, true, true, false);
  echo_req["reps"] = spec.replications;
  echo_req["seed"] = spec.seed;
  json out = envelope("simulate", echo_req);
  merge(out, report::to_json(est));
  return out;
}

json anova(const AnovaRequest& request) {
  const RMDataset data = request.long_format ? io::parse_long_csv(request.csv) : io::parse_wide_csv(request.csv);
  AnovaOptions opts;
  opts.greenhouse_geisser = request.greenhouse_geisser;
  opts.huynh_feldt = request.huynh_feldt;
  const AnovaTable table = run_anova(data, opts);

  json req = {{"format", request.long_format ? "long" : "wide"},
              {"gg", request.greenhouse_geisser},
              {"hf", request.huynh_feldt},
              {"friedman", request.friedman}};
  json out = envelope("anova", req);
  merge(out, report::to_json(table));
  out["time_labels"] = data.time_labels;
  json labels = json::array();
  for (const auto& b : data.groups) labels.push_back(b.label);
  out["group_labels"] = labels;
  if (request.friedman) out["friedman"] = report::to_json(friedman_test(data));
  return out;
}

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Unsatisfiable: return 422;
    case ErrorKind::Io: return 500;
    default: return 400;
  }
}

ApiResponse dispatch(std::string_view endpoint, std::string_view body,
                     const std::map<std::string, std::string>& query, const ServiceLimits& limits) {
  auto flag = [&](const char* key) {
    const auto it = query.find(key);
    return it != query.end() && (it->second == "1" || it->second == "true" || it->second.empty());
  };
  try {
    if (endpoint == "health") return {200, {{"status", "ok"}, {"schema_version", report::kSchemaVersion}}};
    if (endpoint == "anova") {
      AnovaRequest req;
      req.csv = std::string(body);
      const auto fmt_it = query.find("format");
      req.long_format = fmt_it != query.end() && fmt_it->second == "long";
      req.greenhouse_geisser = flag("gg");
      req.huynh_feldt = flag("hf");
      req.friedman = flag("friedman");
      return {200, anova(req)};
    }
    json req = json::object();
    if (!body.empty()) {
      try {
        req = json::parse(body);
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
      }
    }
    if (endpoint == "power") return {200, power(req)};
    if (endpoint == "nsize") return {200, nsize(req)};
    if (endpoint == "mde") return {200, mde(req)};
    if (endpoint == "curve") return {200, curve(req)};
    if (endpoint == "simulate") return {200, simulate(req, limits)};
    return {404, report::error_json(Error(ErrorKind::Parse, "unknown endpoint '" + std::string(endpoint) + "'"))};
  } catch (const Error& e) {
    return {status_for(e.kind()), report::error_json(e)};
  } catch (const json::exception& e) {
    // e.g. integer overflow on get<long>
    return {400, report::error_json(ParseError(e.what()))};
  }
}

}  // namespace rmpower::api
