#include "rmpower/power.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rmpower/distributions.hpp"
#include "rmpower/errors.hpp"

namespace rmpower {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidDesign, what); }

std::string num(double v) {
  std::string s = std::to_string(v);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

// Between-groups tests carry no sphericity correction.
EffectSpec effective(TestKind kind, EffectSpec eff) {
  if (kind == TestKind::BetweenGroups) eff.epsilon = 1.0;
  return eff;
}

void check_target(const EffectSpec& eff) {
  if (!(eff.target_power > eff.alpha && eff.target_power < 1.0))
    invalid("target power must lie in (alpha, 1), got " + num(eff.target_power));
}

}  // namespace

std::string_view to_string(TestKind kind) {
  switch (kind) {
    case TestKind::BetweenGroups: return "between";
    case TestKind::WithinTime: return "within";
    case TestKind::Interaction: return "interaction";
  }
  return "between";
}

TestKind parse_test_kind(std::string_view text) {
  if (text == "between") return TestKind::BetweenGroups;
  if (text == "within") return TestKind::WithinTime;
  if (text == "interaction") return TestKind::Interaction;
  invalid("unknown test kind '" + std::string(text) + "' (expected between|within|interaction)");
}

void validate_inputs(TestKind kind, const StudyDesign& design, const EffectSpec& eff) {
  if (design.groups < 1) invalid("number of groups must be >= 1, got " + std::to_string(design.groups));
  if (design.times < 2) invalid("number of time points must be >= 2, got " + std::to_string(design.times));
  if (kind != TestKind::WithinTime && design.groups < 2)
    invalid(std::string(to_string(kind)) + " test needs at least 2 groups");
  if (design.n_total <= design.groups)
    invalid("total sample size N=" + std::to_string(design.n_total) + " must exceed the number of groups g=" +
            std::to_string(design.groups));

  const double tm1 = design.times - 1.0;
  if (!(eff.f >= 0.0) || !std::isfinite(eff.f)) invalid("effect size f must be >= 0, got " + num(eff.f));
  if (!(eff.rho > -1.0 / tm1 && eff.rho < 1.0))
    invalid("correlation rho must lie in (" + num(-1.0 / tm1) + ", 1), got " + num(eff.rho));
  if (kind != TestKind::BetweenGroups && !(eff.epsilon >= 1.0 / tm1 - 1e-12 && eff.epsilon <= 1.0))
    invalid("epsilon must lie in [" + num(1.0 / tm1) + ", 1], got " + num(eff.epsilon));
  if (!(eff.alpha > 0.0 && eff.alpha < 1.0)) invalid("alpha must lie in (0, 1), got " + num(eff.alpha));
}

NoncentralitySpec noncentrality(TestKind kind, const StudyDesign& design, const EffectSpec& raw) {
  validate_inputs(kind, design, raw);
  const EffectSpec eff = effective(kind, raw);
  const double g = design.groups;
  const double t = design.times;
  const double n = static_cast<double>(design.n_total);
  const double f2 = eff.f * eff.f;

  NoncentralitySpec out;
  switch (kind) {
    case TestKind::BetweenGroups:
      out.lambda = f2 * t * n / (1.0 + (t - 1.0) * eff.rho);
      out.df1 = g - 1.0;
      out.df2 = n - g;
      break;
    case TestKind::WithinTime:
      out.lambda = f2 * t * n * eff.epsilon / (1.0 - eff.rho);
      out.df1 = (t - 1.0) * eff.epsilon;
      out.df2 = (n - g) * (t - 1.0) * eff.epsilon;
      break;
    case TestKind::Interaction:
      out.lambda = f2 * t * n * eff.epsilon / (1.0 - eff.rho);
      out.df1 = (g - 1.0) * (t - 1.0) * eff.epsilon;
      out.df2 = (n - g) * (t - 1.0) * eff.epsilon;
      break;
  }
  if (!(out.df1 > 0.0) || !(out.df2 > 0.0)) invalid("design yields nonpositive degrees of freedom");
  return out;
}

PowerResult compute_power(TestKind kind, const StudyDesign& design, const EffectSpec& eff) {
  PowerResult out;
  out.spec = noncentrality(kind, design, eff);
  const dist::DistParams central{out.spec.df1, out.spec.df2, 0.0};
  out.crit_f = dist::f_quantile(1.0 - eff.alpha, central);
  const dist::DistParams shifted{out.spec.df1, out.spec.df2, out.spec.lambda};
  out.power = 1.0 - dist::noncentral_f_cdf(out.crit_f, shifted);
  return out;
}

SampleSizeResult required_sample_size(TestKind kind, const StudyDesign& design, const EffectSpec& eff,
                                      const SolverOptions& opts) {
  StudyDesign probe = design;
  probe.n_total = 2L * design.groups;
  validate_inputs(kind, probe, eff);
  if (!(eff.f > 0.0)) invalid("sample size search needs f > 0");
  check_target(eff);

  const long g = design.groups;
  auto power_at = [&](long n) {
    StudyDesign d = design;
    d.n_total = n;
    return compute_power(kind, d, eff).power;
  };

  // Smallest n = lo + k*step (k >= 0) with power(n) >= target. Power is
  // increasing in N, so gallop to a feasible bound, then bisect.
  auto smallest_feasible = [&](long lo, long step, long& n_out, double& p_out) {
    double p = power_at(lo);
    if (p >= eff.target_power) {
      n_out = lo;
      p_out = p;
      return;
    }
    long bad = 0;  // offsets in units of step
    long span = 1;
    long good = -1;
    for (;;) {
      const long k = bad + span;
      const long n = lo + k * step;
      if (n > opts.max_total_n) {
        const long cap_k = (opts.max_total_n - lo) / step;
        if (cap_k <= bad || power_at(lo + cap_k * step) < eff.target_power)
          throw Error(ErrorKind::Unsatisfiable,
                      "target power " + num(eff.target_power) + " not reachable with N <= " +
                          std::to_string(opts.max_total_n));
        good = cap_k;
        break;
      }
      if (power_at(n) >= eff.target_power) {
        good = k;
        break;
      }
      bad = k;
      span *= 2;
    }
    while (good - bad > 1) {
      const long mid = bad + (good - bad) / 2;
      if (power_at(lo + mid * step) >= eff.target_power)
        good = mid;
      else
        bad = mid;
    }
    n_out = lo + good * step;
    p_out = power_at(n_out);
  };

  SampleSizeResult out;
  smallest_feasible(2 * g, g, out.n_total, out.achieved_power);
  smallest_feasible(2 * g, 1, out.integer_n_total, out.integer_power);
  return out;
}

double minimal_detectable_effect(TestKind kind, const StudyDesign& design, const EffectSpec& eff,
                                 const SolverOptions& opts) {
  EffectSpec probe = eff;
  probe.f = 0.0;
  validate_inputs(kind, design, probe);
  check_target(eff);

  auto power_at = [&](double f) {
    EffectSpec e = eff;
    e.f = f;
    return compute_power(kind, design, e).power;
  };

  double hi = opts.max_effect;
  if (power_at(hi) < eff.target_power)
    throw Error(ErrorKind::Unsatisfiable, "target power " + num(eff.target_power) +
                                              " not reachable with f <= " + num(opts.max_effect));
  double lo = 0.0;
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    mid = 0.5 * (lo + hi);
    const double p = power_at(mid);
    if (std::fabs(p - eff.target_power) <= opts.power_tolerance) break;
    if (p < eff.target_power)
      lo = mid;
    else
      hi = mid;
  }
  return mid;
}

CurveTable power_curve(TestKind kind, const StudyDesign& design, const EffectSpec& base,
                       const std::vector<double>& f_values, const std::vector<long>& n_values) {
  if (f_values.empty()) invalid("power curve needs at least one effect size");
  if (n_values.empty()) invalid("power curve needs at least one sample size");
  for (double f : f_values)
    if (!(f > 0.0) || !std::isfinite(f)) invalid("power curve effect sizes must be positive, got " + num(f));

  CurveTable table;
  table.kind = kind;
  table.rows.reserve(f_values.size() * n_values.size());
  for (double f : f_values) {
    for (long n : n_values) {
      if (n < 2L * design.groups) {
        table.warnings.push_back("skipped f=" + num(f) + " N=" + std::to_string(n) + ": N below 2g=" +
                                 std::to_string(2L * design.groups));
        continue;
      }
      StudyDesign d = design;
      d.n_total = n;
      EffectSpec e = base;
      e.f = f;
      try {
        table.rows.push_back({f, n, compute_power(kind, d, e).power});
      } catch (const Error& err) {
        table.warnings.push_back("skipped f=" + num(f) + " N=" + std::to_string(n) + ": " + err.what());
      }
    }
  }
  return table;
}

std::vector<long> n_grid(long lo, long hi, long step) {
  if (step <= 0) invalid("sample size step must be positive");
  std::vector<long> out;
  for (long n = lo; n <= hi; n += step) out.push_back(n);
  return out;
}

double f_from_eta_squared(double eta_squared) {
  if (!(eta_squared >= 0.0 && eta_squared < 1.0))
    invalid("eta squared must lie in [0, 1), got " + num(eta_squared));
  return std::sqrt(eta_squared / (1.0 - eta_squared));
}

}  // namespace rmpower
