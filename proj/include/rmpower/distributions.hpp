#pragma once

// Special functions and the F / chi-square distribution family.
//
// Degrees of freedom are real-valued throughout: sphericity-corrected tests
// scale both dfs by epsilon, so non-integer values are routine. Every function
// is pure and throws rmpower::Error{ErrorKind::Domain} on invalid arguments.

namespace rmpower::dist {

struct DistParams {
  double d1 = 1.0;      // numerator degrees of freedom
  double d2 = 1.0;      // denominator degrees of freedom
  double lambda = 0.0;  // noncentrality
};

/// log Gamma(x) for x > 0 (Lanczos approximation, reflection-free).
double ln_gamma(double x);

/// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double x, double a, double b);

/// Regularized lower incomplete gamma P(a, x).
double reg_lower_gamma(double a, double x);

/// Central F CDF; `p.lambda` must be zero.
double f_cdf(double x, const DistParams& p);

/// Central F upper tail P(F > x), evaluated without cancellation so that
/// small p-values keep their relative precision.
double f_sf(double x, const DistParams& p);

/// Central F quantile by bracketed bisection on [1e-10, 1e10].
double f_quantile(double prob, const DistParams& p);

double chisq_cdf(double x, double df);
double chisq_sf(double x, double df);

/// Noncentral F CDF as a Poisson mixture of incomplete betas. The series is
/// summed outward from the modal Poisson index until the neglected Poisson
/// mass drops below 1e-12. Reduces to f_cdf when lambda == 0.
double noncentral_f_cdf(double x, const DistParams& p);

}  // namespace rmpower::dist
