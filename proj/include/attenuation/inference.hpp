#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace attenuation {

/// Inference method for a disattenuated correlation.
///
/// - Corr: reliability indices are sample correlations in (0, 1).
/// - Free: as Corr, but the indices may take either sign.
/// - Cronbach: reliabilities are coefficient alphas with known testlet counts.
/// - HS: Hunter-Schmidt normal-theory test; reliabilities treated as known.
enum class Method { Corr, Free, Cronbach, HS };

std::string_view to_string(Method method);

/// Parses "corr", "free", "cronbach" or "hs" (case-insensitive).
Method parse_method(std::string_view name);

/// Observed estimates. `r1` is the correlation between the two noisy
/// measures. For Corr/Free, `rel2` and `rel3` are the correlations between
/// each measure and its latent variable; for Cronbach/HS they are
/// reliabilities (squared correlations).
struct EstimateSet {
  double r1 = 0.0;
  double rel2 = 0.0;
  double rel3 = 0.0;
};

struct StudyDesign {
  long n1 = 0;
  long n2 = 0;
  long n3 = 0;
  std::optional<long> k2;  // testlet counts, Cronbach only
  std::optional<long> k3;

  /// Same sample size for all three estimates.
  static StudyDesign uniform(long n) { return {n, n, n, std::nullopt, std::nullopt}; }
};

struct PValueResult {
  double p = 1.0;
  /// Optimal (rho2, rho3) for Corr/Free or (R2, R3) for Cronbach. Empty for HS.
  std::optional<std::pair<double, double>> nuisance;
  /// Minimised quadratic form; for HS the squared z statistic.
  double objective = 0.0;
};

struct NuisanceSolution {
  std::pair<double, double> nuisance;
  double objective = 0.0;
};

struct HsInterval {
  double raw_lo = 0.0;
  double raw_hi = 0.0;
  double lo = 0.0;  // clipped to [-1, 1]
  double hi = 0.0;
  /// False when the raw interval misses [-1, 1] entirely.
  bool intersects = true;
};

/// Raised when the nuisance optimiser exhausts its iteration budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks the estimate and design invariants for `method`; throws
/// std::invalid_argument describing the first violation.
void validate(const EstimateSet& est, const StudyDesign& design, Method method);

/// Spearman's plug-in estimate r1 / (r2 r3), unclipped.
double point_estimate(const EstimateSet& est, Method method);

/// Sum of squared standardised deviations (eta_i - s_i)^2 / d_i.
double quadratic_objective(const std::array<double, 3>& eta, const std::array<double, 3>& s,
                           const std::array<double, 3>& variances);

/// Minimises the quadratic form over the two nuisance parameters with the
/// first mean tied to rho0 through the disattenuation constraint.
NuisanceSolution solve_nuisance(double rho0, const EstimateSet& est, const StudyDesign& design,
                                Method method);

/// p-value for H0: rho = rho0.
PValueResult pvalue(double rho0, const EstimateSet& est, const StudyDesign& design, Method method);

/// Hunter-Schmidt interval at the given confidence level; `est` holds
/// reliabilities.
HsInterval hs_interval(const EstimateSet& est, const StudyDesign& design, double level);

/// Numerical box for the nuisance parameters: [kBoxEpsilon, 1 - kBoxEpsilon].
inline constexpr double kBoxEpsilon = 1e-9;

}  // namespace attenuation
