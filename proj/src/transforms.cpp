#include "attenuation/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace attenuation {

namespace {

[[noreturn]] void domain_fail(const char* what, double value) {
  throw std::domain_error(std::string(what) + " (got " + std::to_string(value) + ")");
}

double chisq3_density(double x) {
  if (x <= 0.0) return 0.0;
  return std::sqrt(x) * std::exp(-0.5 * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double artanh(double x) {
  if (!(std::fabs(x) < 1.0)) domain_fail("artanh: argument must lie in (-1, 1)", x);
  return std::atanh(x);
}

double tanh(double z) { return std::tanh(z); }

double fisher_variance(long n) {
  if (n <= 3) domain_fail("fisher_variance: sample size must be at least 4", static_cast<double>(n));
  return 1.0 / static_cast<double>(n - 3);
}

double alpha_eta(double reliability) {
  if (!(reliability >= 0.0 && reliability < 1.0))
    domain_fail("alpha_eta: reliability must lie in [0, 1)", reliability);
  return 0.5 * std::log1p(-reliability);
}

double alpha_variance(long n, long k) {
  if (k < 2) domain_fail("alpha_variance: testlet count must be at least 2", static_cast<double>(k));
  if (n < 1) domain_fail("alpha_variance: sample size must be positive", static_cast<double>(n));
  const auto kd = static_cast<double>(k);
  return kd / (2.0 * (kd - 1.0) * static_cast<double>(n));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) domain_fail("normal_quantile: probability must lie in (0, 1)", p);

  // Acklam's rational approximation followed by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double chisq3_cdf(double x) {
  if (!(x >= 0.0)) domain_fail("chisq3_cdf: argument must be nonnegative", x);
  if (std::isinf(x)) return 1.0;
  const double value = std::erf(std::sqrt(0.5 * x)) -
                       std::sqrt(2.0 * x / std::numbers::pi) * std::exp(-0.5 * x);
  return std::clamp(value, 0.0, 1.0);
}

double chisq3_sf(double x) {
  if (!(x >= 0.0)) domain_fail("chisq3_sf: argument must be nonnegative", x);
  if (std::isinf(x)) return 0.0;
  const double value = std::erfc(std::sqrt(0.5 * x)) +
                       std::sqrt(2.0 * x / std::numbers::pi) * std::exp(-0.5 * x);
  return std::clamp(value, 0.0, 1.0);
}

double chisq3_quantile(double p) {
  if (!(p >= 0.0 && p < 1.0)) domain_fail("chisq3_quantile: probability must lie in [0, 1)", p);
  if (p == 0.0) return 0.0;

  double lo = 0.0;
  double hi = 200.0;
  double x = 3.0;  // near the mode region; Newton takes over quickly
  for (int iter = 0; iter < 200; ++iter) {
    const double f = chisq3_cdf(x) - p;
    if (std::fabs(f) <= 1e-12) return x;
    if (f < 0.0)
      lo = x;
    else
      hi = x;
    const double dens = chisq3_density(x);
    double next = dens > 0.0 ? x - f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-14 * std::max(1.0, x)) return next;
    x = next;
  }
  return x;
}

}  // namespace attenuation
