#include "rmpower/mcvalidate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include "rmpower/errors.hpp"

namespace rmpower::mc {

namespace {

// Centered linear ramp over `levels`, scaled to unit root-mean-square.
std::vector<double> unit_ramp(int levels) {
  std::vector<double> r(levels);
  double ss = 0.0;
  for (int i = 0; i < levels; ++i) {
    r[i] = i - 0.5 * (levels - 1);
    ss += r[i] * r[i];
  }
  const double rms = std::sqrt(ss / levels);
  for (auto& v : r) v /= rms;
  return r;
}

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  // (0, 1]: never zero, so log(u1) is finite
  double uniform() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Rejection decision for one analyzed replicate.
bool rejects(const AnovaTable& table, TestKind kind, double alpha) {
  Source src = Source::Time;
  if (kind == TestKind::BetweenGroups) src = Source::Group;
  if (kind == TestKind::Interaction) src = Source::GroupTime;
  const AnovaRow* row = table.find(src);
  if (row == nullptr || !row->p) throw Error(ErrorKind::InvalidDesign, "simulated table lacks the tested row");
  return *row->p < alpha;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void validate_spec(const SimSpec& spec) {
  validate_inputs(spec.kind, spec.design, spec.eff);
  if (spec.replications < 100)
    throw Error(ErrorKind::InvalidDesign, "replications must be >= 100, got " + std::to_string(spec.replications));
  if (spec.design.n_total % spec.design.groups != 0 || spec.design.n_total < 2L * spec.design.groups)
    throw Error(ErrorKind::InvalidDesign, "simulation needs N a multiple of g with at least 2 subjects per group");
  if (spec.eff.rho < 0.0)
    throw Error(ErrorKind::InvalidDesign, "simulation models rho as a subject variance and needs rho >= 0");
}

std::vector<std::vector<double>> mean_pattern(TestKind kind, const StudyDesign& design, double f) {
  const int g = design.groups;
  const int t = design.times;
  std::vector<std::vector<double>> mu(g, std::vector<double>(t, 0.0));
  if (f == 0.0) return mu;
  switch (kind) {
    case TestKind::BetweenGroups: {
      const auto a = unit_ramp(g);
      for (int k = 0; k < g; ++k)
        for (int j = 0; j < t; ++j) mu[k][j] = f * a[k];
      break;
    }
    case TestKind::WithinTime: {
      const auto b = unit_ramp(t);
      for (int k = 0; k < g; ++k)
        for (int j = 0; j < t; ++j) mu[k][j] = f * b[j];
      break;
    }
    case TestKind::Interaction: {
      // rank-one ramp x ramp; both factors have unit RMS, so the product does too
      const auto a = unit_ramp(g);
      const auto b = unit_ramp(t);
      for (int k = 0; k < g; ++k)
        for (int j = 0; j < t; ++j) mu[k][j] = f * a[k] * b[j];
      break;
    }
  }
  return mu;
}

RMDataset simulate_dataset(const SimSpec& spec, std::uint64_t replicate_index) {
  validate_spec(spec);
  const int g = spec.design.groups;
  const int t = spec.design.times;
  const long per_group = spec.design.n_total / g;
  const auto mu = mean_pattern(spec.kind, spec.design, spec.eff.f);
  const double subject_sd = std::sqrt(spec.eff.rho);
  const double error_sd = std::sqrt(1.0 - spec.eff.rho);

  NormalStream normal(splitmix64(spec.seed ^ splitmix64(replicate_index)));
  RMDataset d;
  d.time_labels.reserve(t);
  for (int j = 0; j < t; ++j) d.time_labels.push_back("T" + std::to_string(j + 1));
  d.groups.resize(g);
  for (int k = 0; k < g; ++k) {
    auto& block = d.groups[k];
    block.label = std::to_string(k + 1);
    block.subjects.reserve(per_group);
    block.rows.reserve(per_group);
    for (long i = 0; i < per_group; ++i) {
      block.subjects.push_back(std::to_string(i + 1));
      const double subject = subject_sd * normal();
      std::vector<double> row(t);
      for (int j = 0; j < t; ++j) row[j] = mu[k][j] + subject + error_sd * normal();
      block.rows.push_back(std::move(row));
    }
  }
  return d;
}

MCPowerEstimate estimate_power_mc(const SimSpec& spec, unsigned threads) {
  validate_spec(spec);
  const double analytic = compute_power(spec.kind, spec.design, spec.eff).power;
  const bool one_group = spec.design.groups == 1;

  const auto reps = static_cast<std::size_t>(spec.replications);
  std::vector<unsigned char> hit(reps, 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto worker = [&] {
    try {
      for (std::size_t r = next.fetch_add(1); r < reps && !failed; r = next.fetch_add(1)) {
        const RMDataset d = simulate_dataset(spec, r);
        const AnovaTable table = one_group ? one_sample_rm_anova(d) : multi_sample_rm_anova(d);
        hit[r] = rejects(table, spec.kind, spec.eff.alpha) ? 1 : 0;
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };

  unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, reps));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  MCPowerEstimate out;
  out.replications = spec.replications;
  out.rejections = std::count(hit.begin(), hit.end(), 1);
  out.rejection_rate = static_cast<double>(out.rejections) / static_cast<double>(reps);
  out.std_error = std::sqrt(out.rejection_rate * (1.0 - out.rejection_rate) / static_cast<double>(reps));
  out.analytic_power = analytic;
  const double diff = out.rejection_rate - analytic;
  // An all-or-nothing outcome has zero empirical SE; fall back to the analytic one.
  double se = out.std_error;
  if (se == 0.0) se = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(reps));
  out.z_discrepancy = se > 0.0 ? diff / se : 0.0;
  return out;
}

}  // namespace rmpower::mc
