#pragma once

// Repeated-measures ANOVA on observed data.
//
// Model: y_kij = mu + rho_i(k) + tau_j + gamma_k + (tau gamma)_kj + e_kij for
// group k, subject i within group k, time j. Groups may be unbalanced; all
// marginal means are subject-weighted.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rmpower {

struct GroupBlock {
  std::string label;
  std::vector<std::string> subjects;       // one id per row
  std::vector<std::vector<double>> rows;   // subjects x t; NaN marks a missing cell
};

struct RMDataset {
  std::vector<std::string> time_labels;
  std::vector<GroupBlock> groups;

  std::size_t times() const { return time_labels.size(); }
  std::size_t group_count() const { return groups.size(); }
  std::size_t subject_count() const;
};

/// Returns `raw` unchanged when every invariant holds, otherwise throws
/// ValidationError naming the first offending coordinate.
RMDataset validate_dataset(RMDataset raw);

enum class Source { Group, Subject, Time, GroupTime, Error };

std::string_view to_string(Source source);
Source parse_source(std::string_view text);

struct AdjustedP {
  std::string method;  // "GG", "HF", or caller-provided
  double epsilon = 1.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p = 1.0;
};

struct AnovaRow {
  Source source = Source::Error;
  double ss = 0.0;
  double df = 0.0;
  double ms = 0.0;
  std::optional<double> f;
  std::optional<double> p;
  std::optional<double> df_error;  // denominator df of the F test
  std::vector<AdjustedP> adjusted;
};

struct SphericityReport {
  double mauchly_w = 1.0;
  double chisq = 0.0;
  int df = 0;
  double p = 1.0;
  double eps_gg = 1.0;
  double eps_hf = 1.0;      // capped at 1
  double eps_hf_raw = 1.0;  // before capping
  double eps_lower_bound = 1.0;
};

struct AnovaTable {
  std::size_t groups = 0;
  std::size_t subjects = 0;
  std::size_t times = 0;
  double ss_total = 0.0;  // about the grand mean
  std::vector<AnovaRow> rows;
  std::optional<SphericityReport> sphericity;

  const AnovaRow* find(Source source) const;
};

struct EffectsDecomposition {
  double grand_mean = 0.0;
  std::vector<double> time_effects;                     // t
  std::vector<double> group_effects;                    // g
  std::vector<std::vector<double>> interaction_effects; // g x t
  std::vector<std::vector<double>> subject_effects;     // per group, per subject
  std::vector<std::vector<std::vector<double>>> residuals;  // g x n_k x t
};

struct MauchlyResult {
  double w = 1.0;
  double chisq = 0.0;
  int df = 0;
  double p = 1.0;
};

struct Epsilons {
  double gg = 1.0;
  double hf = 1.0;
  double hf_raw = 1.0;
};

struct FriedmanResult {
  double statistic = 0.0;
  int df = 0;
  double p = 1.0;
};

/// One-group test of equal time means: F = MS_time / MS_error on
/// (t-1, (n-1)(t-1)) df. Emits Subject, Time and Error rows.
AnovaTable one_sample_rm_anova(const RMDataset& data);

/// Group, Subject(Group), Time, Group x Time and Error rows. The Time and
/// Group x Time tests share MS_error. With a single group the Group and
/// Group x Time rows are omitted and the result matches one_sample_rm_anova.
AnovaTable multi_sample_rm_anova(const RMDataset& data);

EffectsDecomposition effects_decomposition(const RMDataset& data);

/// Pooled within-group covariance of the t measurements (divisor n - g).
Eigen::MatrixXd pooled_covariance(const RMDataset& data);

/// Orthonormal Helmert contrasts, t x (t-1).
Eigen::MatrixXd orthonormal_contrasts(int t);

MauchlyResult mauchly_test(const RMDataset& data);
Epsilons estimate_epsilons(const RMDataset& data);

/// Covariance-level entry points; `error_df` is n - g.
MauchlyResult mauchly_from_covariance(const Eigen::MatrixXd& cov, double error_df);
Epsilons epsilons_from_covariance(const Eigen::MatrixXd& cov, std::size_t subjects, std::size_t groups);

SphericityReport sphericity_report(const RMDataset& data);

/// Appends an adjusted p-value to the Time and Group x Time rows, computed
/// with both dfs multiplied by `eps`. F statistics are untouched.
AnovaTable adjusted_pvalues(const AnovaTable& table, double eps, const std::string& method = "eps");

/// Rank-based alternative for one group: mid-ranks within subject, tie
/// corrected Q referred to chi-square on t-1 df.
FriedmanResult friedman_test(const RMDataset& data);

struct AnovaOptions {
  bool sphericity = true;     // attach Mauchly / epsilon report when estimable
  bool greenhouse_geisser = false;
  bool huynh_feldt = false;
};

/// Dispatches on group count and attaches the requested diagnostics.
AnovaTable run_anova(const RMDataset& data, const AnovaOptions& opts = {});

}  // namespace rmpower
