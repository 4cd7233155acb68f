#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rmpower/distributions.hpp"
#include "rmpower/errors.hpp"

using namespace rmpower;
using dist::DistParams;

TEST_SUITE("distributions") {

TEST_CASE("ln_gamma matches std::lgamma across magnitudes") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 400; ++i) {
    const double x = std::pow(10.0, u(rng));
    const double ref = std::lgamma(x);
    const double tol = x < 1e3 ? 1e-12 : 1e-14 * std::abs(ref);
    CHECK(std::abs(dist::ln_gamma(x) - ref) <= std::max(tol, 4e-15 * std::abs(ref)));
  }
  CHECK(dist::ln_gamma(1.0) == doctest::Approx(0.0));
  CHECK(dist::ln_gamma(2.0) == doctest::Approx(0.0));
  CHECK(dist::ln_gamma(0.5) == doctest::Approx(0.5 * std::log(M_PI)).epsilon(1e-14));
  CHECK(std::abs(dist::ln_gamma(10.0) - std::log(362880.0)) < 1e-12);
}

TEST_CASE("regularized incomplete beta agrees with density quadrature") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ab(1.0, 60.0), xs(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double a = ab(rng), b = ab(rng), x = xs(rng);
    CHECK(std::abs(dist::reg_inc_beta(x, a, b) - oracle::inc_beta(x, a, b)) < 1e-11);
  }
  CHECK(dist::reg_inc_beta(0.0, 2, 3) == 0.0);
  CHECK(dist::reg_inc_beta(1.0, 2, 3) == 1.0);
  // I_x(1,1) = x, I_x(a,1) = x^a
  CHECK(dist::reg_inc_beta(0.3, 1, 1) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(dist::reg_inc_beta(0.3, 2.5, 1) == doctest::Approx(std::pow(0.3, 2.5)).epsilon(1e-13));
}

TEST_CASE("incomplete beta converges for very large shape parameters") {
  // symmetric Beta(a, a): I_0.5 = 0.5 at every scale
  for (double a : {0.3, 1.0, 7.5, 40.0, 1e3, 5e5})
    CHECK(std::abs(dist::reg_inc_beta(0.5, a, a) - 0.5) < 1e-12);
}

TEST_CASE("chi-square tails are complementary and match known values") {
  CHECK(dist::chisq_cdf(3.841458820694124, 1) == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(dist::chisq_sf(16.918977604620448, 9) == doctest::Approx(0.05).epsilon(1e-11));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> k(0.5, 80), x(0.01, 150);
  for (int i = 0; i < 200; ++i) {
    const double kk = k(rng), xx = x(rng);
    CHECK(dist::chisq_cdf(xx, kk) + dist::chisq_sf(xx, kk) == doctest::Approx(1.0).epsilon(1e-13));
  }
  // chi2(2) is exponential(1/2)
  CHECK(dist::chisq_sf(5.0, 2) == doctest::Approx(std::exp(-2.5)).epsilon(1e-13));
}

TEST_CASE("central F: closed forms and complement") {
  // F(2, 2): cdf = x / (1 + x)
  for (double x : {0.1, 0.5, 1.0, 3.0, 20.0})
    CHECK(dist::f_cdf(x, {2, 2, 0}) == doctest::Approx(x / (1 + x)).epsilon(1e-13));
  CHECK(dist::f_cdf(0.0, {3, 10, 0}) == 0.0);
  CHECK_THROWS_AS(dist::f_cdf(-1.0, {3, 10, 0}), Error);
  CHECK(dist::f_cdf(1.0, {7, 7, 0}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(dist::f_sf(1e-300, {3, 10, 0}) == doctest::Approx(1.0));
  CHECK(dist::f_sf(2.0661, {4, 16, 0}) == doctest::Approx(0.13313).epsilon(1e-4));
}

TEST_CASE("f_quantile inverts f_cdf") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> df(0.5, 300), pr(0.001, 0.999);
  for (int i = 0; i < 300; ++i) {
    const DistParams p{df(rng), df(rng), 0};
    const double q = pr(rng);
    CHECK(std::abs(dist::f_cdf(dist::f_quantile(q, p), p) - q) < 1e-9);
  }
  CHECK(dist::f_quantile(0.95, {3, 108, 0}) == doctest::Approx(2.68869146802766).epsilon(1e-11));
  CHECK_THROWS_AS(dist::f_quantile(1.0, {3, 10, 0}), Error);
  CHECK_THROWS_AS(dist::f_quantile(-0.1, {3, 10, 0}), Error);
}

TEST_CASE("noncentral F reduces to central F at lambda = 0") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> df(1, 100), xs(0.05, 6);
  for (int i = 0; i < 200; ++i) {
    const double d1 = df(rng), d2 = df(rng), x = xs(rng);
    CHECK(dist::noncentral_f_cdf(x, {d1, d2, 0}) == doctest::Approx(dist::f_cdf(x, {d1, d2, 0})).epsilon(1e-13));
  }
}

TEST_CASE("noncentral F agrees with nested quadrature") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> d1s(1, 20), d2s(2, 200), xs(0.1, 6), lam(0, 60);
  const double fixed_lambdas[] = {0.0, 15.0, 40.0};
  for (int i = 0; i < 30; ++i) {
    const double d1 = d1s(rng), d2 = d2s(rng), x = xs(rng);
    const double l = i < 15 ? fixed_lambdas[i % 3] : lam(rng);
    const double got = dist::noncentral_f_cdf(x, {d1, d2, l});
    const double ref = oracle::noncentral_f_cdf(x, d1, d2, l);
    INFO("x=", x, " d1=", d1, " d2=", d2, " lambda=", l);
    CHECK(std::abs(got - ref) < 1e-8);
  }
  // scipy.stats.ncf.cdf(2.5, 4, 80, 15)
  CHECK(dist::noncentral_f_cdf(2.5, {4, 80, 15}) == doctest::Approx(0.131956512629965).epsilon(1e-11));
}

TEST_CASE("noncentral F is monotone in x and decreasing in lambda") {
  double prev = 0;
  for (double x = 0.05; x < 10; x += 0.05) {
    const double c = dist::noncentral_f_cdf(x, {4, 40, 12});
    CHECK(c >= prev - 1e-15);
    prev = c;
  }
  for (double l = 0; l < 80; l += 2)
    CHECK(dist::noncentral_f_cdf(2.0, {4, 40, l + 2}) <= dist::noncentral_f_cdf(2.0, {4, 40, l}) + 1e-15);
}

TEST_CASE("distribution domain errors") {
  CHECK_THROWS_AS(dist::noncentral_f_cdf(1.0, {0, 10, 1}), Error);
  CHECK_THROWS_AS(dist::noncentral_f_cdf(1.0, {2, -1, 1}), Error);
  CHECK_THROWS_AS(dist::noncentral_f_cdf(1.0, {2, 10, -1}), Error);
  CHECK_THROWS_AS(dist::reg_inc_beta(1.5, 2, 2), Error);
  CHECK_THROWS_AS(dist::ln_gamma(0.0), Error);
}

}
