#include "rmpower/rmanova.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "rmpower/distributions.hpp"
#include "rmpower/errors.hpp"

namespace rmpower {

namespace {

// Sums of squares below this fraction of SS_total are treated as exact zeros.
constexpr double kZeroSsFraction = 1e-13;

struct Means {
  std::size_t g = 0, t = 0, n = 0;
  double grand = 0.0;
  std::vector<double> col;                  // t, subject-weighted
  std::vector<double> group;                // g
  std::vector<std::vector<double>> cell;    // g x t
  std::vector<std::vector<double>> subject; // g x n_k
};

Means compute_means(const RMDataset& d) {
  Means m;
  m.g = d.groups.size();
  m.t = d.times();
  m.col.assign(m.t, 0.0);
  m.group.assign(m.g, 0.0);
  m.cell.assign(m.g, std::vector<double>(m.t, 0.0));
  m.subject.resize(m.g);
  for (std::size_t k = 0; k < m.g; ++k) {
    const auto& rows = d.groups[k].rows;
    const double nk = static_cast<double>(rows.size());
    m.n += rows.size();
    m.subject[k].reserve(rows.size());
    for (const auto& row : rows) {
      const double s = std::accumulate(row.begin(), row.end(), 0.0);
      m.subject[k].push_back(s / static_cast<double>(m.t));
      for (std::size_t j = 0; j < m.t; ++j) m.cell[k][j] += row[j];
    }
    double gs = 0.0;
    for (std::size_t j = 0; j < m.t; ++j) {
      m.col[j] += m.cell[k][j];
      gs += m.cell[k][j];
      m.cell[k][j] /= nk;
    }
    m.group[k] = gs / (nk * static_cast<double>(m.t));
    m.grand += gs;
  }
  const double n = static_cast<double>(m.n);
  for (auto& c : m.col) c /= n;
  m.grand /= n * static_cast<double>(m.t);
  return m;
}

double total_ss(const RMDataset& d, double grand) {
  double ss = 0.0;
  for (const auto& block : d.groups)
    for (const auto& row : block.rows)
      for (double y : row) ss += (y - grand) * (y - grand);
  return ss;
}

// Fills F and p on `row` against the error term. A zero error mean square is
// only tolerated when the effect itself is zero (F = 0, p = 1).
void f_test(AnovaRow& row, double err_ss, double err_df, double scale, const char* denominator) {
  const double zero = kZeroSsFraction * scale;
  row.df_error = err_df;
  if (err_ss <= zero) {
    if (row.ss <= zero) {
      row.f = 0.0;
      row.p = 1.0;
      return;
    }
    throw Error(ErrorKind::ZeroVariance, std::string("F undefined for ") + std::string(to_string(row.source)) +
                                             ": " + denominator + " mean square is zero");
  }
  const double f = row.ms / (err_ss / err_df);
  row.f = f;
  row.p = dist::f_sf(f, {row.df, err_df, 0.0});
}

AnovaRow make_row(Source s, double ss, double df) {
  AnovaRow r;
  r.source = s;
  r.ss = ss;
  r.df = df;
  r.ms = ss / df;
  return r;
}

Eigen::MatrixXd contrast_covariance(const Eigen::MatrixXd& cov) {
  const Eigen::MatrixXd c = orthonormal_contrasts(static_cast<int>(cov.rows()));
  Eigen::MatrixXd m = c.transpose() * cov * c;
  return 0.5 * (m + m.transpose());
}

void require_analyzable_sphericity(const RMDataset& d) {
  const std::size_t n = d.subject_count();
  const std::size_t g = d.group_count();
  if (d.times() > 2 && n - g < d.times() - 1)
    throw Error(ErrorKind::SingularCovariance,
                "sphericity needs n - g >= t - 1 (n=" + std::to_string(n) + ", g=" + std::to_string(g) +
                    ", t=" + std::to_string(d.times()) + ")");
}

}  // namespace

std::size_t RMDataset::subject_count() const {
  std::size_t n = 0;
  for (const auto& b : groups) n += b.rows.size();
  return n;
}

RMDataset validate_dataset(RMDataset raw) {
  if (raw.groups.empty()) throw ValidationError(ValidationIssue::Empty, "dataset has no groups");
  const std::size_t t = raw.times();
  if (t < 2)
    throw ValidationError(ValidationIssue::TooFewTimes,
                          "need at least 2 time points, got " + std::to_string(t));
  for (std::size_t k = 0; k < raw.groups.size(); ++k) {
    const auto& block = raw.groups[k];
    const std::string where = "group '" + block.label + "'";
    if (block.subjects.size() != block.rows.size())
      throw ValidationError(ValidationIssue::RaggedRows,
                            where + ": " + std::to_string(block.subjects.size()) + " subject ids for " +
                                std::to_string(block.rows.size()) + " rows",
                            k);
    if (block.rows.size() < 2)
      throw ValidationError(ValidationIssue::TooFewSubjects,
                            where + " has " + std::to_string(block.rows.size()) + " subject(s); need at least 2",
                            k);
    const bool uniform_width =
        std::all_of(block.rows.begin(), block.rows.end(),
                    [&](const auto& r) { return r.size() == block.rows.front().size(); });
    if (uniform_width && block.rows.front().size() != t)
      throw ValidationError(ValidationIssue::MismatchedTimes,
                            where + " has " + std::to_string(block.rows.front().size()) +
                                " time points, dataset has " + std::to_string(t),
                            k);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < block.rows.size(); ++i) {
      const auto& row = block.rows[i];
      if (row.size() != t)
        throw ValidationError(ValidationIssue::RaggedRows,
                              where + ", subject '" + block.subjects[i] + "': row has " +
                                  std::to_string(row.size()) + " cells, expected " + std::to_string(t),
                              k, i);
      for (std::size_t j = 0; j < t; ++j)
        if (!std::isfinite(row[j]))
          throw ValidationError(ValidationIssue::MissingCell,
                                where + ", subject '" + block.subjects[i] + "', time '" + raw.time_labels[j] +
                                    "': missing or non-finite value",
                                k, i, j);
      if (!seen.insert(block.subjects[i]).second)
        throw ValidationError(ValidationIssue::DuplicateSubject,
                              where + ": duplicate subject '" + block.subjects[i] + "'", k, i);
    }
  }
  return raw;
}

std::string_view to_string(Source source) {
  switch (source) {
    case Source::Group: return "Group";
    case Source::Subject: return "Subject(Group)";
    case Source::Time: return "Time";
    case Source::GroupTime: return "Group x Time";
    case Source::Error: return "Error";
  }
  return "Error";
}

Source parse_source(std::string_view text) {
  for (Source s : {Source::Group, Source::Subject, Source::Time, Source::GroupTime, Source::Error})
    if (to_string(s) == text) return s;
  if (text == "Subject") return Source::Subject;
  throw ParseError("unknown ANOVA source '" + std::string(text) + "'");
}

const AnovaRow* AnovaTable::find(Source source) const {
  for (const auto& r : rows)
    if (r.source == source) return &r;
  return nullptr;
}

AnovaTable one_sample_rm_anova(const RMDataset& raw) {
  const RMDataset d = validate_dataset(raw);
  if (d.group_count() != 1)
    throw Error(ErrorKind::InvalidDesign, "one-sample ANOVA needs exactly one group, got " +
                                              std::to_string(d.group_count()));
  const auto& y = d.groups.front().rows;
  const std::size_t n = y.size();
  const std::size_t t = d.times();

  std::vector<double> time_mean(t, 0.0);
  std::vector<double> subj_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < t; ++j) {
      time_mean[j] += y[i][j];
      subj_mean[i] += y[i][j];
      grand += y[i][j];
    }
  for (auto& v : time_mean) v /= static_cast<double>(n);
  for (auto& v : subj_mean) v /= static_cast<double>(t);
  grand /= static_cast<double>(n * t);

  double ss_time = 0.0, ss_subj = 0.0, ss_err = 0.0;
  for (std::size_t j = 0; j < t; ++j) ss_time += (time_mean[j] - grand) * (time_mean[j] - grand);
  ss_time *= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) ss_subj += (subj_mean[i] - grand) * (subj_mean[i] - grand);
  ss_subj *= static_cast<double>(t);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < t; ++j) {
      const double r = y[i][j] - subj_mean[i] - time_mean[j] + grand;
      ss_err += r * r;
    }

  AnovaTable table;
  table.groups = 1;
  table.subjects = n;
  table.times = t;
  table.ss_total = total_ss(d, grand);
  const double df_err = (n - 1.0) * (t - 1.0);
  AnovaRow subj = make_row(Source::Subject, ss_subj, n - 1.0);
  AnovaRow time = make_row(Source::Time, ss_time, t - 1.0);
  f_test(time, ss_err, df_err, table.ss_total, "error");
  table.rows = {subj, time, make_row(Source::Error, ss_err, df_err)};
  return table;
}

AnovaTable multi_sample_rm_anova(const RMDataset& raw) {
  const RMDataset d = validate_dataset(raw);
  const Means m = compute_means(d);
  const double g = static_cast<double>(m.g);
  const double t = static_cast<double>(m.t);
  const double n = static_cast<double>(m.n);

  double ss_group = 0.0, ss_subj = 0.0, ss_time = 0.0, ss_int = 0.0, ss_err = 0.0;
  for (std::size_t k = 0; k < m.g; ++k) {
    const auto& rows = d.groups[k].rows;
    const double nk = static_cast<double>(rows.size());
    ss_group += nk * (m.group[k] - m.grand) * (m.group[k] - m.grand);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ss_subj += (m.subject[k][i] - m.group[k]) * (m.subject[k][i] - m.group[k]);
      for (std::size_t j = 0; j < m.t; ++j) {
        const double r = rows[i][j] - m.cell[k][j] - m.subject[k][i] + m.group[k];
        ss_err += r * r;
      }
    }
    for (std::size_t j = 0; j < m.t; ++j) {
      const double ge = m.cell[k][j] - m.group[k] - m.col[j] + m.grand;
      ss_int += nk * ge * ge;
    }
  }
  ss_group *= t;
  ss_subj *= t;
  for (std::size_t j = 0; j < m.t; ++j) ss_time += (m.col[j] - m.grand) * (m.col[j] - m.grand);
  ss_time *= n;

  AnovaTable table;
  table.groups = m.g;
  table.subjects = m.n;
  table.times = m.t;
  table.ss_total = total_ss(d, m.grand);

  const double df_subj = n - g;
  const double df_err = (n - g) * (t - 1.0);
  AnovaRow subj = make_row(Source::Subject, ss_subj, df_subj);
  AnovaRow time = make_row(Source::Time, ss_time, t - 1.0);
  f_test(time, ss_err, df_err, table.ss_total, "error");
  if (m.g > 1) {
    AnovaRow group = make_row(Source::Group, ss_group, g - 1.0);
    f_test(group, ss_subj, df_subj, table.ss_total, "subject(group)");
    AnovaRow inter = make_row(Source::GroupTime, ss_int, (g - 1.0) * (t - 1.0));
    f_test(inter, ss_err, df_err, table.ss_total, "error");
    table.rows = {group, subj, time, inter, make_row(Source::Error, ss_err, df_err)};
  } else {
    table.rows = {subj, time, make_row(Source::Error, ss_err, df_err)};
  }
  return table;
}

EffectsDecomposition effects_decomposition(const RMDataset& raw) {
  const RMDataset d = validate_dataset(raw);
  const Means m = compute_means(d);
  EffectsDecomposition e;
  e.grand_mean = m.grand;
  e.time_effects.resize(m.t);
  for (std::size_t j = 0; j < m.t; ++j) e.time_effects[j] = m.col[j] - m.grand;
  e.group_effects.resize(m.g);
  e.interaction_effects.assign(m.g, std::vector<double>(m.t));
  e.subject_effects.resize(m.g);
  e.residuals.resize(m.g);
  for (std::size_t k = 0; k < m.g; ++k) {
    e.group_effects[k] = m.group[k] - m.grand;
    for (std::size_t j = 0; j < m.t; ++j)
      e.interaction_effects[k][j] = m.cell[k][j] - m.group[k] - m.col[j] + m.grand;
    const auto& rows = d.groups[k].rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      e.subject_effects[k].push_back(m.subject[k][i] - m.group[k]);
      std::vector<double> res(m.t);
      for (std::size_t j = 0; j < m.t; ++j) res[j] = rows[i][j] - m.cell[k][j] - m.subject[k][i] + m.group[k];
      e.residuals[k].push_back(std::move(res));
    }
  }
  return e;
}

Eigen::MatrixXd orthonormal_contrasts(int t) {
  if (t < 2) throw Error(ErrorKind::InvalidDesign, "contrasts need t >= 2");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(t, t - 1);
  for (int col = 0; col < t - 1; ++col) {
    // column col contrasts level col+1 against the mean of levels 0..col
    const double m = col + 1.0;
    const double norm = std::sqrt(m * (m + 1.0));
    for (int r = 0; r <= col; ++r) c(r, col) = 1.0 / norm;
    c(col + 1, col) = -m / norm;
  }
  return c;
}

Eigen::MatrixXd pooled_covariance(const RMDataset& raw) {
  const RMDataset d = validate_dataset(raw);
  const Means m = compute_means(d);
  const auto t = static_cast<Eigen::Index>(m.t);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(t, t);
  Eigen::VectorXd dev(t);
  for (std::size_t k = 0; k < m.g; ++k)
    for (const auto& row : d.groups[k].rows) {
      for (Eigen::Index j = 0; j < t; ++j) dev(j) = row[j] - m.cell[k][j];
      s.noalias() += dev * dev.transpose();
    }
  return s / static_cast<double>(m.n - m.g);
}

MauchlyResult mauchly_from_covariance(const Eigen::MatrixXd& cov, double error_df) {
  const int p = static_cast<int>(cov.rows()) - 1;
  MauchlyResult out;
  if (p <= 1) return out;  // a single contrast is trivially spherical
  const Eigen::MatrixXd m = contrast_covariance(cov);
  const double trace = m.trace();
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (!(trace > 0.0) || llt.info() != Eigen::Success)
    throw Error(ErrorKind::SingularCovariance, "contrast covariance is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  double log_det = 0.0;
  for (int i = 0; i < p; ++i) {
    const double piv = l(i, i) * l(i, i);
    if (!(piv > 1e-12 * trace / p))
      throw Error(ErrorKind::SingularCovariance, "contrast covariance is numerically singular");
    log_det += std::log(piv);
  }
  const double log_w = log_det - p * std::log(trace / p);
  out.w = std::min(1.0, std::exp(log_w));
  const double pd = p;
  const double d = 1.0 - (2.0 * pd * pd + pd + 2.0) / (6.0 * pd * error_df);
  out.chisq = std::max(0.0, -error_df * d * log_w);
  out.df = p * (p + 1) / 2 - 1;
  out.p = dist::chisq_sf(out.chisq, out.df);
  return out;
}

Epsilons epsilons_from_covariance(const Eigen::MatrixXd& cov, std::size_t subjects, std::size_t groups) {
  const int p = static_cast<int>(cov.rows()) - 1;
  Epsilons out;
  if (p <= 1) return out;
  const Eigen::MatrixXd m = contrast_covariance(cov);
  const double tr = m.trace();
  const double tr2 = m.squaredNorm();  // trace(M M) for symmetric M
  if (!(tr > 0.0) || !(tr2 > 0.0))
    throw Error(ErrorKind::SingularCovariance, "contrast covariance is zero");
  out.gg = std::clamp(tr * tr / (p * tr2), 1.0 / p, 1.0);
  const double n = static_cast<double>(subjects);
  const double g = static_cast<double>(groups);
  const double den = p * (n - g - p * out.gg);
  // nonpositive denominator: the estimator has blown past 1
  out.hf_raw = den > 0.0 ? (n * p * out.gg - 2.0) / den : 1.0;
  out.hf = std::min(1.0, std::max(out.hf_raw, out.gg));
  return out;
}

MauchlyResult mauchly_test(const RMDataset& raw) {
  const RMDataset d = validate_dataset(raw);
  if (d.times() == 2) return {};
  require_analyzable_sphericity(d);
  return mauchly_from_covariance(pooled_covariance(d),
                                 static_cast<double>(d.subject_count() - d.group_count()));
}

Epsilons estimate_epsilons(const RMDataset& raw) {
  const RMDataset d = validate_dataset(raw);
  if (d.times() == 2) return {};
  require_analyzable_sphericity(d);
  return epsilons_from_covariance(pooled_covariance(d), d.subject_count(), d.group_count());
}

SphericityReport sphericity_report(const RMDataset& data) {
  const MauchlyResult mt = mauchly_test(data);
  const Epsilons eps = estimate_epsilons(data);
  SphericityReport r;
  r.mauchly_w = mt.w;
  r.chisq = mt.chisq;
  r.df = mt.df;
  r.p = mt.p;
  r.eps_gg = eps.gg;
  r.eps_hf = eps.hf;
  r.eps_hf_raw = eps.hf_raw;
  r.eps_lower_bound = 1.0 / (static_cast<double>(data.times()) - 1.0);
  return r;
}

AnovaTable adjusted_pvalues(const AnovaTable& table, double eps, const std::string& method) {
  const double lower = table.times > 1 ? 1.0 / (static_cast<double>(table.times) - 1.0) : 1.0;
  if (!(eps >= lower - 1e-12 && eps <= 1.0))
    throw Error(ErrorKind::InvalidDesign, "epsilon " + std::to_string(eps) + " outside [1/(t-1), 1]");
  AnovaTable out = table;
  for (auto& row : out.rows) {
    if (row.source != Source::Time && row.source != Source::GroupTime) continue;
    if (!row.f || !row.df_error) continue;
    AdjustedP adj;
    adj.method = method;
    adj.epsilon = eps;
    adj.df1 = row.df * eps;
    adj.df2 = *row.df_error * eps;
    adj.p = *row.f == 0.0 ? 1.0 : dist::f_sf(*row.f, {adj.df1, adj.df2, 0.0});
    row.adjusted.push_back(adj);
  }
  return out;
}

FriedmanResult friedman_test(const RMDataset& raw) {
  const RMDataset d = validate_dataset(raw);
  if (d.group_count() != 1)
    throw Error(ErrorKind::InvalidDesign, "Friedman test needs exactly one group");
  const std::size_t t = d.times();
  if (t < 3) throw Error(ErrorKind::InvalidDesign, "Friedman test needs t >= 3");
  const auto& y = d.groups.front().rows;
  const double n = static_cast<double>(y.size());
  const double td = static_cast<double>(t);

  std::vector<double> rank_sum(t, 0.0);
  double tie_sum = 0.0;
  std::vector<std::size_t> order(t);
  for (const auto& row : y) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
    for (std::size_t lo = 0; lo < t;) {
      std::size_t hi = lo + 1;
      while (hi < t && row[order[hi]] == row[order[lo]]) ++hi;
      const double mid_rank = 0.5 * static_cast<double>(lo + 1 + hi);  // mean of ranks lo+1..hi
      for (std::size_t k = lo; k < hi; ++k) rank_sum[order[k]] += mid_rank;
      const double ties = static_cast<double>(hi - lo);
      tie_sum += ties * ties * ties - ties;
      lo = hi;
    }
  }
  const double correction = 1.0 - tie_sum / (n * (td * td * td - td));
  if (!(correction > 1e-12))
    throw Error(ErrorKind::Degenerate, "Friedman test undefined: every subject is constant across time");
  double sum_sq = 0.0;
  for (double r : rank_sum) sum_sq += r * r;
  const double q = 12.0 / (n * td * (td + 1.0)) * sum_sq - 3.0 * n * (td + 1.0);
  FriedmanResult out;
  out.statistic = std::max(0.0, q / correction);
  out.df = static_cast<int>(t) - 1;
  out.p = dist::chisq_sf(out.statistic, out.df);
  return out;
}

AnovaTable run_anova(const RMDataset& raw, const AnovaOptions& opts) {
  const RMDataset d = validate_dataset(raw);
  AnovaTable table = d.group_count() == 1 ? one_sample_rm_anova(d) : multi_sample_rm_anova(d);
  const bool want_eps = opts.greenhouse_geisser || opts.huynh_feldt;
  if (opts.sphericity || want_eps) {
    try {
      table.sphericity = sphericity_report(d);
    } catch (const Error& e) {
      if (want_eps || e.kind() != ErrorKind::SingularCovariance) throw;
    }
  }
  if (opts.greenhouse_geisser) table = adjusted_pvalues(table, table.sphericity->eps_gg, "GG");
  if (opts.huynh_feldt) table = adjusted_pvalues(table, table.sphericity->eps_hf, "HF");
  return table;
}

}  // namespace rmpower
