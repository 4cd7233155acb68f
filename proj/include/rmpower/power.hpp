#pragma once

// A-priori power analysis for the three repeated-measures F tests.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rmpower {

enum class TestKind { BetweenGroups, WithinTime, Interaction };

std::string_view to_string(TestKind kind);
/// Accepts "between", "within", "interaction" (case-sensitive).
TestKind parse_test_kind(std::string_view text);

struct StudyDesign {
  int groups = 1;       // g
  int times = 2;        // t, number of repeated measures
  long n_total = 0;     // N, equal allocation N / g per group when planning
};

struct EffectSpec {
  double f = 0.25;             // Cohen's f
  double rho = 0.5;            // correlation among repeated measures
  double epsilon = 1.0;        // nonsphericity correction
  double alpha = 0.05;
  double target_power = 0.8;   // 1 - beta
};

struct NoncentralitySpec {
  double lambda = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
};

struct PowerResult {
  double power = 0.0;
  double crit_f = 0.0;
  NoncentralitySpec spec;
};

struct SampleSizeResult {
  long n_total = 0;          // smallest feasible multiple of g
  double achieved_power = 0.0;
  long integer_n_total = 0;  // smallest feasible N >= 2g without the multiple-of-g restriction
  double integer_power = 0.0;
};

struct SolverOptions {
  long max_total_n = 1'000'000;
  double max_effect = 10.0;
  double power_tolerance = 1e-8;
};

struct CurveRow {
  double f = 0.0;
  long n_total = 0;
  double power = 0.0;
};

struct CurveTable {
  TestKind kind = TestKind::BetweenGroups;
  std::vector<CurveRow> rows;
  std::vector<std::string> warnings;  // one per skipped (f, N) combination
};

/// Checks design and effect invariants for `kind`; throws
/// Error{InvalidDesign}. N is checked only through the df it implies.
void validate_inputs(TestKind kind, const StudyDesign& design, const EffectSpec& eff);

NoncentralitySpec noncentrality(TestKind kind, const StudyDesign& design, const EffectSpec& eff);

/// power = 1 - F_{lambda,df1,df2}(F^{-1}_{df1,df2}(1 - alpha))
PowerResult compute_power(TestKind kind, const StudyDesign& design, const EffectSpec& eff);

/// Smallest N on the grid 2g, 3g, ... whose power reaches eff.target_power.
/// `design.n_total` is ignored.
SampleSizeResult required_sample_size(TestKind kind, const StudyDesign& design, const EffectSpec& eff,
                                      const SolverOptions& opts = {});

/// Effect size f at which power equals eff.target_power for the fixed N in
/// `design`. `eff.f` is ignored.
double minimal_detectable_effect(TestKind kind, const StudyDesign& design, const EffectSpec& eff,
                                 const SolverOptions& opts = {});

/// One row per (f, N) pair, f-major. Rows whose design is invalid are skipped
/// and reported in `warnings`.
CurveTable power_curve(TestKind kind, const StudyDesign& design, const EffectSpec& base,
                       const std::vector<double>& f_values, const std::vector<long>& n_values);

/// Inclusive grid lo, lo + step, ..., <= hi.
std::vector<long> n_grid(long lo, long hi, long step);

/// Cohen's f from a (partial) eta squared.
double f_from_eta_squared(double eta_squared);

}  // namespace rmpower
