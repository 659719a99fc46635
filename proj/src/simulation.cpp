#include "attenuation/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace attenuation {

namespace {

constexpr double kAlphaFloor = 1e-6;

Eigen::MatrixXd compound_symmetric(double c, long k) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(k, k, c);
  cov.diagonal().setOnes();
  return cov;
}

Eigen::MatrixXd draw_rows(const Eigen::MatrixXd& lower, long n, RandomStream& stream) {
  const auto k = lower.rows();
  Eigen::MatrixXd z(n, k);
  for (long i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) z(i, j) = stream.normal();
  return z * lower.transpose();
}

Eigen::MatrixXd cs_factor(double reliability, long k) {
  return compound_symmetric(compound_symmetry_covariance(reliability, k), k).llt().matrixL();
}

double sample_alpha_with_factor(const Eigen::MatrixXd& lower, long n, RandomStream& stream) {
  const Eigen::MatrixXd x = draw_rows(lower, n, stream);
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);
  return cronbach_alpha(cov);
}

struct Tally {
  long covered = 0;
  long failures = 0;
  long floored = 0;
};

}  // namespace

double sample_bivariate_correlation(double rho, long n, RandomStream& stream) {
  const double tail = std::sqrt(1.0 - rho * rho);
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (long i = 0; i < n; ++i) {
    const double x = stream.normal();
    const double y = rho * x + tail * stream.normal();
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double nd = static_cast<double>(n);
  const double cxy = sxy - sx * sy / nd;
  const double cxx = sxx - sx * sx / nd;
  const double cyy = syy - sy * sy / nd;
  return cxy / std::sqrt(cxx * cyy);
}

double compound_symmetry_covariance(double reliability, long k) {
  if (k < 2) throw std::domain_error("testlet count must be at least 2");
  const double kd = static_cast<double>(k);
  const double c = reliability / (kd - (kd - 1.0) * reliability);
  if (!(c > 0.0 && c < 1.0))
    throw std::domain_error("reliability " + std::to_string(reliability) +
                            " gives an inter-testlet correlation outside (0, 1)");
  return c;
}

double cronbach_alpha(const Eigen::MatrixXd& cov) {
  const auto k = cov.rows();
  if (k < 2 || cov.cols() != k) throw std::domain_error("cronbach_alpha: need a square matrix with k >= 2");
  const double total = cov.sum();
  if (!(total > 0.0)) throw std::domain_error("cronbach_alpha: degenerate sample (grand sum <= 0)");
  const double kd = static_cast<double>(k);
  return kd / (kd - 1.0) * (1.0 - cov.trace() / total);
}

Eigen::MatrixXd sample_testlets(double reliability, long k, long n, RandomStream& stream) {
  return draw_rows(cs_factor(reliability, k), n, stream);
}

double sample_alpha(double reliability, long k, long n, RandomStream& stream) {
  return sample_alpha_with_factor(cs_factor(reliability, k), n, stream);
}

void validate(const SimConfig& config) {
  if (config.cells.empty()) throw ConfigError("cells: at least one cell is required");
  if (config.methods.empty()) throw ConfigError("methods: at least one method is required");
  if (config.reps < 1) throw ConfigError("reps: must be at least 1");
  if (!(config.level > 0.0 && config.level < 1.0)) throw ConfigError("level: must lie in (0, 1)");
  for (std::size_t i = 0; i < config.cells.size(); ++i) {
    const auto& c = config.cells[i];
    const std::string where = "cells[" + std::to_string(i) + "].";
    if (c.n < 4) throw ConfigError(where + "N: must be at least 4");
    if (!(std::fabs(c.rho) < 1.0)) throw ConfigError(where + "rho: must lie in (-1, 1)");
    if (c.k < 2) throw ConfigError(where + "k: must be at least 2");
    if (!(c.reliability > 0.0 && c.reliability < 1.0)) throw ConfigError(where + "R: must lie in (0, 1)");
    if (c.n < c.k + 1) throw ConfigError(where + "N: must exceed the testlet count k");
  }
}

std::vector<CoverageRecord> run_coverage(const SimConfig& config, int threads) {
  validate(config);
  const std::size_t n_cells = config.cells.size();
  const std::size_t n_methods = config.methods.size();
  const double alpha = 1.0 - config.level;
  const auto reps = static_cast<std::size_t>(config.reps);

  std::vector<Eigen::MatrixXd> factors;
  factors.reserve(n_cells);
  for (const auto& cell : config.cells)
    factors.push_back(cs_factor(cell.reliability, cell.k));

  const std::size_t total = n_cells * reps;
  const auto worker_count =
      static_cast<std::size_t>(std::clamp<long>(threads, 1, static_cast<long>(total)));
  std::vector<std::vector<Tally>> partial(worker_count, std::vector<Tally>(n_cells * n_methods));

  auto work = [&](std::size_t worker) {
    auto& tallies = partial[worker];
    for (std::size_t task = worker; task < total; task += worker_count) {
      const std::size_t ci = task / reps;
      const std::size_t rep = task % reps;
      const auto& cell = config.cells[ci];
      auto stream = derive_stream(config.seed, ci, rep);

      const double alpha2 = sample_alpha_with_factor(factors[ci], cell.n, stream);
      const double alpha3 = sample_alpha_with_factor(factors[ci], cell.n, stream);
      const double r1 = sample_bivariate_correlation(cell.rho * cell.reliability, cell.n, stream);
      const bool needs_floor = alpha2 < kAlphaFloor || alpha3 < kAlphaFloor;
      const double f2 = std::max(alpha2, kAlphaFloor);
      const double f3 = std::max(alpha3, kAlphaFloor);

      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        const Method method = config.methods[mi];
        auto& tally = tallies[ci * n_methods + mi];
        EstimateSet est;
        StudyDesign design = StudyDesign::uniform(cell.n);
        switch (method) {
          case Method::Corr:
          case Method::Free:
            est = {r1, std::sqrt(f2), std::sqrt(f3)};
            break;
          case Method::HS:
            est = {r1, f2, f3};
            break;
          case Method::Cronbach:
            est = {r1, alpha2, alpha3};
            design.k2 = cell.k;
            design.k3 = cell.k;
            break;
        }
        if (needs_floor && method != Method::Cronbach) ++tally.floored;
        try {
          if (pvalue(cell.rho, est, design, method).p >= alpha) ++tally.covered;
        } catch (const std::exception&) {
          ++tally.failures;
        }
      }
    }
  };

  if (worker_count == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(worker_count);
    for (std::size_t w = 0; w < worker_count; ++w) pool.emplace_back(work, w);
  }

  std::vector<CoverageRecord> records;
  records.reserve(n_cells * n_methods);
  for (std::size_t ci = 0; ci < n_cells; ++ci) {
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      CoverageRecord rec;
      rec.cell = config.cells[ci];
      rec.method = config.methods[mi];
      rec.reps = config.reps;
      for (const auto& part : partial) {
        const auto& t = part[ci * n_methods + mi];
        rec.covered += t.covered;
        rec.failures += t.failures;
        rec.floored += t.floored;
      }
      rec.coverage = static_cast<double>(rec.covered) / static_cast<double>(rec.reps);
      records.push_back(rec);
    }
  }
  return records;
}

std::vector<SimCell> full_grid() {
  std::vector<SimCell> cells;
  for (long n : {50L, 100L, 200L, 400L})
    for (double rho : {0.4, 0.6})
      for (long k : {4L, 8L})
        for (double r : {0.25, 0.36, 0.49, 0.64, 0.81}) cells.push_back({n, rho, k, r});
  return cells;
}

}  // namespace attenuation
