#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rmpower/distributions.hpp"
#include "rmpower/errors.hpp"
#include "rmpower/power.hpp"

using namespace rmpower;

namespace {

StudyDesign design(int g, int t, long n = 0) { return {g, t, n}; }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_SUITE("power") {

TEST_CASE("noncentrality and degrees of freedom per test kind") {
  EffectSpec e;
  e.epsilon = 0.6;
  const auto b = noncentrality(TestKind::BetweenGroups, design(4, 5, 112), e);
  CHECK(b.lambda == doctest::Approx(0.0625 * 5 * 112 / 3.0));
  CHECK(b.df1 == 3);
  CHECK(b.df2 == 108);
  const auto w = noncentrality(TestKind::WithinTime, design(4, 5, 24), e);
  CHECK(w.lambda == doctest::Approx(0.0625 * 5 * 24 * 0.6 / 0.5));
  CHECK(w.df1 == doctest::Approx(4 * 0.6));
  CHECK(w.df2 == doctest::Approx(20 * 4 * 0.6));
  const auto i = noncentrality(TestKind::Interaction, design(4, 5, 32), e);
  CHECK(i.lambda == doctest::Approx(0.0625 * 5 * 32 * 0.6 / 0.5));
  CHECK(i.df1 == doctest::Approx(3 * 4 * 0.6));
  CHECK(i.df2 == doctest::Approx(28 * 4 * 0.6));
}

TEST_CASE("between-groups power ignores epsilon") {
  EffectSpec e;
  const double p1 = compute_power(TestKind::BetweenGroups, design(3, 4, 30), e).power;
  e.epsilon = 0.4;
  CHECK(compute_power(TestKind::BetweenGroups, design(3, 4, 30), e).power == p1);
}

TEST_CASE("power equals the noncentral F tail at the critical value") {
  EffectSpec e;
  const auto r = compute_power(TestKind::WithinTime, design(4, 5, 24), e);
  CHECK(r.crit_f == doctest::Approx(dist::f_quantile(0.95, {4, 80, 0})).epsilon(1e-12));
  const double tail = 1.0 - oracle::noncentral_f_cdf(r.crit_f, 4, 80, 15);
  CHECK(std::abs(r.power - tail) < 1e-9);
}

TEST_CASE("reference sample sizes for g=4, t=5, f=0.25, rho=0.5") {
  EffectSpec e;
  const auto b = required_sample_size(TestKind::BetweenGroups, design(4, 5), e);
  CHECK(b.n_total == 112);
  CHECK(b.achieved_power >= 0.8);
  CHECK(b.achieved_power == doctest::Approx(0.8136).epsilon(1e-3));
  CHECK(b.integer_n_total == 109);
  const auto w = required_sample_size(TestKind::WithinTime, design(4, 5), e);
  CHECK(w.n_total == 24);
  CHECK(w.integer_n_total == 21);
  const auto i = required_sample_size(TestKind::Interaction, design(4, 5), e);
  CHECK(i.n_total == 32);
  CHECK(i.integer_n_total == 31);
}

TEST_CASE("sample size is the first feasible multiple of g") {
  std::mt19937_64 rng(314);
  std::uniform_int_distribution<int> gs(2, 6), ts(2, 7);
  std::uniform_real_distribution<double> fs(0.15, 0.8), rhos(0.0, 0.8), pw(0.6, 0.95);
  const TestKind kinds[] = {TestKind::BetweenGroups, TestKind::WithinTime, TestKind::Interaction};
  for (int c = 0; c < 200; ++c) {
    const TestKind k = kinds[c % 3];
    const StudyDesign d = design(gs(rng), ts(rng));
    EffectSpec e;
    e.f = fs(rng);
    e.rho = rhos(rng);
    e.target_power = pw(rng);
    const auto r = required_sample_size(k, d, e);
    CHECK(r.n_total % d.groups == 0);
    CHECK(r.achieved_power >= e.target_power);
    if (r.n_total > 2L * d.groups) {
      StudyDesign prev = d;
      prev.n_total = r.n_total - d.groups;
      CHECK(compute_power(k, prev, e).power < e.target_power);
    }
    CHECK(r.integer_n_total <= r.n_total);
    CHECK(r.integer_power >= e.target_power);
  }
}

TEST_CASE("minimal detectable effect round-trips to the target power") {
  EffectSpec e;
  const double f = minimal_detectable_effect(TestKind::Interaction, design(4, 5, 20), e);
  CHECK(f == doctest::Approx(0.3182674851).epsilon(1e-8));
  e.f = f;
  CHECK(std::abs(compute_power(TestKind::Interaction, design(4, 5, 20), e).power - 0.8) < 1e-6);

  EffectSpec w;
  CHECK(minimal_detectable_effect(TestKind::WithinTime, design(4, 5, 20), w) == doctest::Approx(0.2535).epsilon(1e-3));
  CHECK(minimal_detectable_effect(TestKind::BetweenGroups, design(4, 5, 20), w) == doctest::Approx(0.647).epsilon(1e-3));
}

TEST_CASE("power at f = 0 equals alpha") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> gs(2, 8), ts(2, 8), extra(1, 60);
  std::uniform_real_distribution<double> alphas(0.001, 0.2), rhos(0.0, 0.9), eps(0.3, 1.0);
  const TestKind kinds[] = {TestKind::BetweenGroups, TestKind::WithinTime, TestKind::Interaction};
  for (int c = 0; c < 240; ++c) {
    EffectSpec e;
    e.f = 0.0;
    e.alpha = alphas(rng);
    e.rho = rhos(rng);
    e.epsilon = std::max(eps(rng), 0.0);
    const int g = gs(rng), t = ts(rng);
    e.epsilon = std::max(e.epsilon, 1.0 / (t - 1));
    const auto r = compute_power(kinds[c % 3], design(g, t, g + extra(rng)), e);
    CHECK(r.power == doctest::Approx(e.alpha).epsilon(1e-10));
  }
}

TEST_CASE("power is monotone in N and in f") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> gs(2, 5), ts(2, 6);
  std::uniform_real_distribution<double> fs(0.05, 0.6), rhos(0.0, 0.8);
  const TestKind kinds[] = {TestKind::BetweenGroups, TestKind::WithinTime, TestKind::Interaction};
  for (int c = 0; c < 210; ++c) {
    const TestKind k = kinds[c % 3];
    const int g = gs(rng), t = ts(rng);
    EffectSpec e;
    e.f = fs(rng);
    e.rho = rhos(rng);
    double prev = 0;
    for (long n = g + 1; n <= g + 120; n += 7) {
      const double p = compute_power(k, design(g, t, n), e).power;
      CHECK(p >= prev - 1e-12);
      prev = p;
    }
    prev = 0;
    for (double f = 0; f <= 1.0; f += 0.05) {
      EffectSpec ef = e;
      ef.f = f;
      const double p = compute_power(k, design(g, t, 4L * g), ef).power;
      CHECK(p >= prev - 1e-12);
      prev = p;
    }
  }
}

TEST_CASE("power curve grid and warnings") {
  EffectSpec e;
  const auto c = power_curve(TestKind::BetweenGroups, design(4, 5), e, {0.1, 0.25, 0.4}, n_grid(8, 200, 4));
  CHECK(c.rows.size() == 3 * 49);
  CHECK(c.warnings.empty());
  CHECK(c.rows.front().f == 0.1);
  CHECK(c.rows.front().n_total == 8);
  CHECK(c.rows.back().n_total == 200);
  // N = 4 leaves no error df for g = 4
  const auto bad = power_curve(TestKind::BetweenGroups, design(4, 5), e, {0.25}, {4, 8});
  CHECK(bad.rows.size() == 1);
  CHECK(bad.warnings.size() == 1);
  CHECK(n_grid(10, 20, 5) == std::vector<long>{10, 15, 20});
  CHECK_THROWS_AS(n_grid(10, 20, 0), Error);
}

TEST_CASE("input validation") {
  EffectSpec e;
  CHECK(kind_of([&] { compute_power(TestKind::BetweenGroups, design(1, 5, 20), e); }) == ErrorKind::InvalidDesign);
  CHECK(kind_of([&] { compute_power(TestKind::WithinTime, design(1, 1, 20), e); }) == ErrorKind::InvalidDesign);
  CHECK(kind_of([&] { compute_power(TestKind::WithinTime, design(4, 5, 4), e); }) == ErrorKind::InvalidDesign);
  EffectSpec bad = e;
  bad.rho = 1.0;
  CHECK(kind_of([&] { compute_power(TestKind::WithinTime, design(1, 5, 20), bad); }) == ErrorKind::InvalidDesign);
  bad = e;
  bad.alpha = 0.0;
  CHECK(kind_of([&] { compute_power(TestKind::WithinTime, design(1, 5, 20), bad); }) == ErrorKind::InvalidDesign);
  bad = e;
  bad.epsilon = 0.1;  // below 1/(t-1)
  CHECK(kind_of([&] { compute_power(TestKind::WithinTime, design(1, 5, 20), bad); }) == ErrorKind::InvalidDesign);
  bad = e;
  bad.f = -0.1;
  CHECK(kind_of([&] { compute_power(TestKind::WithinTime, design(1, 5, 20), bad); }) == ErrorKind::InvalidDesign);
  CHECK_THROWS_AS(parse_test_kind("sideways"), Error);
}

TEST_CASE("unsatisfiable solver requests") {
  EffectSpec e;
  e.f = 0.01;
  SolverOptions o;
  o.max_total_n = 100;
  CHECK(kind_of([&] { required_sample_size(TestKind::BetweenGroups, design(4, 5), e, o); }) ==
        ErrorKind::Unsatisfiable);
  // one error df: even f = 10 stays far below the target
  EffectSpec tiny;
  tiny.alpha = 0.001;
  tiny.target_power = 0.99;
  CHECK(kind_of([&] { minimal_detectable_effect(TestKind::BetweenGroups, design(2, 2, 3), tiny); }) ==
        ErrorKind::Unsatisfiable);
}

TEST_CASE("solver preconditions") {
  EffectSpec e;
  e.f = 0.0;
  CHECK(kind_of([&] { required_sample_size(TestKind::BetweenGroups, design(4, 5), e); }) == ErrorKind::InvalidDesign);
  EffectSpec low;
  low.target_power = 0.04;
  CHECK(kind_of([&] { minimal_detectable_effect(TestKind::WithinTime, design(1, 3, 10), low); }) ==
        ErrorKind::InvalidDesign);
}

TEST_CASE("eta squared to f") {
  CHECK(f_from_eta_squared(0.0) == 0.0);
  CHECK(f_from_eta_squared(0.0588235294117647) == doctest::Approx(0.25));
  CHECK_THROWS_AS(f_from_eta_squared(1.0), Error);
}

}
