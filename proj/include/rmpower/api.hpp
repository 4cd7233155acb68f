#pragma once

// Request handlers shared by the CLI and the HTTP service. Both surfaces
// build the same JSON request and call these functions, so identical inputs
// produce identical reports.
//
// Planning requests use the keys kind, g, t, n, f, rho, eps, alpha, power.
// Missing optional keys take the defaults f=0.25, rho=0.5, eps=1,
// alpha=0.05, power=0.8, kind="between".

#include <map>
#include <string>
#include <string_view>

#include "rmpower/report.hpp"

namespace rmpower::api {

using json = nlohmann::json;

struct ServiceLimits {
  long max_replications = 200000;
  unsigned threads = 0;  // simulation worker threads, 0 = hardware concurrency
};

json power(const json& request);
json nsize(const json& request);
json mde(const json& request);
/// Extra request keys: f_values (array), n_min, n_max, n_step, render (bool:
/// embed `svg` and `csv` text in the response).
json curve(const json& request);
/// Extra request keys: reps, seed.
json simulate(const json& request, const ServiceLimits& limits = {});

struct AnovaRequest {
  std::string csv;
  bool long_format = false;
  bool greenhouse_geisser = false;
  bool huynh_feldt = false;
  bool friedman = false;
};
json anova(const AnovaRequest& request);

struct ApiResponse {
  int status = 200;
  json body;
};

/// Routes `endpoint` ("power", "nsize", "mde", "curve", "anova", "simulate",
/// "health") and maps library errors to 400 (invalid input) or 422
/// (unsatisfiable solver request).
ApiResponse dispatch(std::string_view endpoint, std::string_view body,
                     const std::map<std::string, std::string>& query, const ServiceLimits& limits = {});

int status_for(ErrorKind kind);

}  // namespace rmpower::api
