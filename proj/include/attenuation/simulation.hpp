#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "attenuation/inference.hpp"
#include "attenuation/random_stream.hpp"

namespace attenuation {

/// One design point of the coverage study. Both reliabilities equal
/// `reliability`, and all three estimates share the sample size `n`.
struct SimCell {
  long n = 0;
  double rho = 0.0;
  long k = 0;
  double reliability = 0.0;
};

struct SimConfig {
  std::vector<SimCell> cells;
  long reps = 0;
  double level = 0.95;
  std::vector<Method> methods;
  std::uint64_t seed = 0;
};

struct CoverageRecord {
  SimCell cell;
  Method method = Method::Corr;
  long covered = 0;
  long reps = 0;
  double coverage = 0.0;
  long failures = 0;  // replicates where inference threw
  long floored = 0;   // replicates with an alpha draw floored before use
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sample correlation of n draws from a standard bivariate normal with
/// correlation rho.
double sample_bivariate_correlation(double rho, long n, RandomStream& stream);

/// Common inter-testlet correlation c for which k parallel unit-variance
/// testlets have population alpha R: c = R / (k - (k-1) R).
double compound_symmetry_covariance(double reliability, long k);

/// k/(k-1) * (1 - trace / grand sum). Throws std::domain_error when the grand
/// sum is not positive.
double cronbach_alpha(const Eigen::MatrixXd& cov);

/// n draws (rows) of k unit-variance testlets whose pairwise correlation makes
/// their population alpha equal to `reliability`.
Eigen::MatrixXd sample_testlets(double reliability, long k, long n, RandomStream& stream);

/// Coefficient alpha of n multivariate normal draws with compound-symmetric
/// covariance (unit variances, common correlation from
/// compound_symmetry_covariance), using the ML covariance estimate.
double sample_alpha(double reliability, long k, long n, RandomStream& stream);

void validate(const SimConfig& config);

/// Coverage of each requested method at each cell. Deterministic in the
/// config for any thread count.
std::vector<CoverageRecord> run_coverage(const SimConfig& config, int threads = 1);

/// The full 4 x 2 x 2 x 5 coverage-study design.
std::vector<SimCell> full_grid();

/// Parses a JSON config. Cells come either from a "cells" array of
/// {"N","rho","k","R"} objects or from a "grid" object whose four arrays are
/// expanded as a Cartesian product. Throws ConfigError naming the field.
SimConfig parse_config(const std::string& json_text);

/// CSV with header `N,rho,k,R,method,reps,covered,coverage,failures`.
void write_coverage_csv(std::ostream& out, const std::vector<CoverageRecord>& records);

struct MethodSummary {
  Method method;
  double mean = 0.0;
  double sd = 0.0;
  long cells = 0;
  long failures = 0;
  long floored = 0;
};

/// Mean and sample standard deviation of coverage across cells, per method.
std::vector<MethodSummary> summarize(const std::vector<CoverageRecord>& records);

}  // namespace attenuation
