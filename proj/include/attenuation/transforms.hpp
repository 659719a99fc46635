#pragma once

// Scalar transforms and distribution functions shared by every inference
// method. Everything here is a pure function of its arguments.

namespace attenuation {

/// Fisher transform of a correlation. Throws std::domain_error for |x| >= 1.
double artanh(double x);

/// Inverse Fisher transform; maps any finite value into (-1, 1).
double tanh(double z);

/// Asymptotic variance 1/(n-3) of artanh(r) for a sample correlation
/// computed from n observations. Requires n >= 4.
double fisher_variance(long n);

/// 1/2 log(1 - R), the variance-stabilised scale of coefficient alpha.
/// Requires 0 <= R < 1.
double alpha_eta(double reliability);

/// Asymptotic variance k / (2 (k-1) n) of 1/2 log(1 - alpha_hat) for an alpha
/// computed from n subjects and k testlets.
double alpha_variance(long n, long k);

double normal_cdf(double z);

/// Standard normal quantile, accurate to full double precision on (0, 1).
double normal_quantile(double p);

/// CDF of the chi-squared distribution with three degrees of freedom, via
/// the closed form 2 Phi(sqrt x) - 1 - sqrt(2x/pi) exp(-x/2).
double chisq3_cdf(double x);

/// Upper tail 1 - chisq3_cdf(x), evaluated without cancellation.
double chisq3_sf(double x);

/// Inverse of chisq3_cdf on [0, 1). Safeguarded Newton inside a bisection
/// bracket on [0, 200].
double chisq3_quantile(double p);

}  // namespace attenuation
