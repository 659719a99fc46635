#include "attenuation/inference.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "attenuation/detail/bounded_newton.hpp"
#include "attenuation/transforms.hpp"

namespace attenuation {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Corr: return "corr";
    case Method::Free: return "free";
    case Method::Cronbach: return "cronbach";
    case Method::HS: return "hs";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "corr") return Method::Corr;
  if (lower == "free") return Method::Free;
  if (lower == "cronbach") return Method::Cronbach;
  if (lower == "hs") return Method::HS;
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected corr, free, cronbach or hs)");
}

namespace {

[[noreturn]] void reject(const std::string& what) { throw std::invalid_argument(what); }

std::string describe(double rho0, const EstimateSet& est, const StudyDesign& design,
                     Method method) {
  std::ostringstream os;
  os.precision(17);
  os << "method=" << to_string(method) << " rho0=" << rho0 << " r=(" << est.r1 << ", "
     << est.rel2 << ", " << est.rel3 << ") N=(" << design.n1 << ", " << design.n2 << ", "
     << design.n3 << ")";
  if (design.k2 && design.k3) os << " k=(" << *design.k2 << ", " << *design.k3 << ")";
  return os.str();
}

// Maps an optimisation coordinate v onto the factor entering the
// disattenuation constraint (a) and onto the scale on which the estimate is
// approximately normal (m), with first and second derivatives.
struct Link {
  double a, da, d2a;
  double m, dm, d2m;
};

Link correlation_link(double t) {
  const double a = std::tanh(t);
  const double sech2 = 1.0 - a * a;
  return {a, sech2, -2.0 * a * sech2, t, 1.0, 0.0};
}

// v is the square root of a reliability.
Link alpha_link(double c) {
  const double one_minus = 1.0 - c * c;
  return {c,   1.0, 0.0, 0.5 * std::log1p(-c * c), -c / one_minus,
          -(1.0 + c * c) / (one_minus * one_minus)};
}

struct Program {
  double rho0;
  std::array<double, 3> s;          // observed, transformed
  std::array<double, 3> precision;  // 1 / variance
  Link (*link)(double);
  detail::Box box;

  detail::SecondOrder evaluate(const detail::Vec2& v) const {
    const Link l2 = link(v[0]);
    const Link l3 = link(v[1]);

    const double x = rho0 * l2.a * l3.a;
    const double one_minus = 1.0 - x * x;
    const double h1 = 1.0 / one_minus;
    const double h2 = 2.0 * x / (one_minus * one_minus);

    const double x2 = rho0 * l2.da * l3.a;
    const double x3 = rho0 * l2.a * l3.da;
    const double x22 = rho0 * l2.d2a * l3.a;
    const double x33 = rho0 * l2.a * l3.d2a;
    const double x23 = rho0 * l2.da * l3.da;

    const double e1 = std::atanh(x) - s[0];
    const double e2 = l2.m - s[1];
    const double e3 = l3.m - s[2];

    const double g2 = h1 * x2;
    const double g3 = h1 * x3;
    const double g22 = h2 * x2 * x2 + h1 * x22;
    const double g33 = h2 * x3 * x3 + h1 * x33;
    const double g23 = h2 * x2 * x3 + h1 * x23;

    detail::SecondOrder out;
    out.value = precision[0] * e1 * e1 + precision[1] * e2 * e2 + precision[2] * e3 * e3;
    out.gradient[0] = 2.0 * (precision[0] * e1 * g2 + precision[1] * e2 * l2.dm);
    out.gradient[1] = 2.0 * (precision[0] * e1 * g3 + precision[2] * e3 * l3.dm);
    out.hessian[0][0] = 2.0 * (precision[0] * (g2 * g2 + e1 * g22) +
                               precision[1] * (l2.dm * l2.dm + e2 * l2.d2m));
    out.hessian[1][1] = 2.0 * (precision[0] * (g3 * g3 + e1 * g33) +
                               precision[2] * (l3.dm * l3.dm + e3 * l3.d2m));
    out.hessian[0][1] = out.hessian[1][0] = 2.0 * precision[0] * (g2 * g3 + e1 * g23);
    return out;
  }
};

Program build_program(double rho0, const EstimateSet& est, const StudyDesign& design,
                      Method method) {
  Program prog{};
  prog.rho0 = rho0;
  prog.s[0] = artanh(est.r1);
  prog.precision[0] = 1.0 / fisher_variance(design.n1);

  const double hi_t = std::atanh(1.0 - kBoxEpsilon);
  switch (method) {
    case Method::Corr:
    case Method::Free: {
      prog.s[1] = artanh(est.rel2);
      prog.s[2] = artanh(est.rel3);
      prog.precision[1] = 1.0 / fisher_variance(design.n2);
      prog.precision[2] = 1.0 / fisher_variance(design.n3);
      prog.link = &correlation_link;
      const double lo_t = method == Method::Corr ? std::atanh(kBoxEpsilon) : -hi_t;
      prog.box = {{lo_t, lo_t}, {hi_t, hi_t}};
      break;
    }
    case Method::Cronbach: {
      // Alphas at or below zero still have a finite transformed value.
      prog.s[1] = 0.5 * std::log1p(-est.rel2);
      prog.s[2] = 0.5 * std::log1p(-est.rel3);
      prog.precision[1] = 1.0 / alpha_variance(design.n2, *design.k2);
      prog.precision[2] = 1.0 / alpha_variance(design.n3, *design.k3);
      prog.link = &alpha_link;
      const double lo_c = std::sqrt(kBoxEpsilon);
      const double hi_c = std::sqrt(1.0 - kBoxEpsilon);
      prog.box = {{lo_c, lo_c}, {hi_c, hi_c}};
      break;
    }
    case Method::HS:
      reject("solve_nuisance: the Hunter-Schmidt method has no nuisance program");
  }
  return prog;
}

// Starting points for the Newton runs: the transformed estimates and the
// discrete local minima of a coarse grid. The grid is uniform in the factor a
// rather than in v, so the region near a = 1 is not oversampled. The program
// can have two interior basins, and a single start finds the wrong one.
std::vector<detail::Vec2> starting_points(const Program& prog, Method method, detail::Vec2 data) {
  constexpr int kGrid = 24;
  constexpr std::size_t kKeep = 3;
  const auto to_v = [method](double a) { return method == Method::Cronbach ? a : std::atanh(a); };
  const auto to_a = [method](double v) { return method == Method::Cronbach ? v : std::tanh(v); };

  std::array<double, kGrid> axis2{}, axis3{};
  for (int i = 0; i < kGrid; ++i) {
    const double u = (i + 0.5) / kGrid;
    const double lo2 = to_a(prog.box.lower[0]), hi2 = to_a(prog.box.upper[0]);
    const double lo3 = to_a(prog.box.lower[1]), hi3 = to_a(prog.box.upper[1]);
    axis2[i] = to_v(lo2 + u * (hi2 - lo2));
    axis3[i] = to_v(lo3 + u * (hi3 - lo3));
  }
  std::array<std::array<double, kGrid>, kGrid> q{};
  for (int i = 0; i < kGrid; ++i)
    for (int j = 0; j < kGrid; ++j) q[i][j] = prog.evaluate({axis2[i], axis3[j]}).value;

  std::vector<std::pair<double, detail::Vec2>> minima;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      bool lowest = std::isfinite(q[i][j]);
      for (int di = -1; di <= 1 && lowest; ++di)
        for (int dj = -1; dj <= 1 && lowest; ++dj) {
          const int a = i + di, b = j + dj;
          if ((di || dj) && a >= 0 && a < kGrid && b >= 0 && b < kGrid) lowest = q[i][j] <= q[a][b];
        }
      if (lowest) minima.push_back({q[i][j], {axis2[i], axis3[j]}});
    }
  }
  std::sort(minima.begin(), minima.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  std::vector<detail::Vec2> starts{data};
  for (std::size_t i = 0; i < std::min(kKeep, minima.size()); ++i) starts.push_back(minima[i].second);
  return starts;
}

std::optional<detail::NewtonResult> best_descent(const Program& prog,
                                                 const std::vector<detail::Vec2>& starts) {
  const auto objective = [&prog](const detail::Vec2& v) { return prog.evaluate(v); };
  std::optional<detail::NewtonResult> best;
  for (const auto& start : starts) {
    const auto result = detail::minimize_in_box(objective, prog.box, start);
    if (!result.converged) continue;
    if (!best || result.value < best->value) best = result;
  }
  return best;
}

}  // namespace

void validate(const EstimateSet& est, const StudyDesign& design, Method method) {
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  auto describe_value = [](const char* name, double v) {
    std::ostringstream os;
    os.precision(10);
    os << name << " = " << v;
    return os.str();
  };

  if (!(std::fabs(est.r1) < 1.0)) reject("r1 must lie in (-1, 1): " + describe_value("r1", est.r1));
  for (auto [name, v] : {std::pair{"rel2", est.rel2}, std::pair{"rel3", est.rel3}}) {
    switch (method) {
      case Method::Corr:
        if (!open_unit(v)) reject(std::string(name) + " must be a correlation in (0, 1): " + describe_value(name, v));
        break;
      case Method::Free:
        if (!(std::fabs(v) < 1.0) || v == 0.0)
          reject(std::string(name) + " must be a nonzero correlation in (-1, 1): " + describe_value(name, v));
        break;
      case Method::Cronbach:
        if (!(v < 1.0) || !std::isfinite(v))
          reject(std::string(name) + " must be a coefficient alpha below 1: " + describe_value(name, v));
        break;
      case Method::HS:
        if (!open_unit(v)) reject(std::string(name) + " must be a reliability in (0, 1): " + describe_value(name, v));
        break;
    }
  }

  if (design.n1 < 4) reject("N1 must be at least 4: N1 = " + std::to_string(design.n1));
  if (method != Method::HS) {
    if (design.n2 < 4) reject("N2 must be at least 4: N2 = " + std::to_string(design.n2));
    if (design.n3 < 4) reject("N3 must be at least 4: N3 = " + std::to_string(design.n3));
  }
  if (method == Method::Cronbach) {
    if (!design.k2 || !design.k3) reject("the cronbach method requires testlet counts k2 and k3");
    if (*design.k2 < 2 || *design.k3 < 2)
      reject("testlet counts must be at least 2: k = (" + std::to_string(*design.k2) + ", " +
             std::to_string(*design.k3) + ")");
  }
}

double point_estimate(const EstimateSet& est, Method method) {
  if (method == Method::Corr || method == Method::Free) return est.r1 / (est.rel2 * est.rel3);
  if (!(est.rel2 > 0.0 && est.rel3 > 0.0))
    reject("point_estimate: reliabilities must be positive");
  return est.r1 / (std::sqrt(est.rel2) * std::sqrt(est.rel3));
}

double quadratic_objective(const std::array<double, 3>& eta, const std::array<double, 3>& s,
                           const std::array<double, 3>& variances) {
  double total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(variances[i] > 0.0))
      throw std::domain_error("quadratic_objective: variances must be positive (got " +
                              std::to_string(variances[i]) + ")");
    const double diff = eta[i] - s[i];
    total += diff * diff / variances[i];
  }
  return total;
}

NuisanceSolution solve_nuisance(double rho0, const EstimateSet& est, const StudyDesign& design,
                                Method method) {
  if (method == Method::HS)
    reject("solve_nuisance: the Hunter-Schmidt method has no nuisance program");
  if (!(rho0 >= -1.0 && rho0 <= 1.0)) throw std::domain_error("rho must lie in [-1,1]");
  validate(est, design, method);

  const Program prog = build_program(rho0, est, design, method);

  std::optional<detail::NewtonResult> best;
  if (method == Method::Cronbach) {
    const auto root = [](double r) { return std::sqrt(std::clamp(r, 1e-6, 1.0 - 1e-6)); };
    best = best_descent(prog, starting_points(prog, method, {root(est.rel2), root(est.rel3)}));
  } else if (method == Method::Corr) {
    best = best_descent(prog, starting_points(prog, method, {prog.s[1], prog.s[2]}));
  } else {
    // The sign symmetry makes the free program non-convex. Solve the
    // positive-quadrant program exactly as the corr method would when the
    // estimates are positive, so the free optimum can never be worse, then
    // search the whole box from one start per quadrant and from that optimum.
    Program positive = prog;
    positive.box.lower = {std::atanh(kBoxEpsilon), std::atanh(kBoxEpsilon)};
    const detail::Vec2 data{prog.s[1], prog.s[2]};
    best = best_descent(positive, starting_points(positive, Method::Corr, data));

    std::vector<detail::Vec2> starts{data};
    const double a = std::max(std::fabs(prog.s[1]), 0.1);
    const double b = std::max(std::fabs(prog.s[2]), 0.1);
    for (double sa : {1.0, -1.0})
      for (double sb : {1.0, -1.0}) starts.push_back({sa * a, sb * b});
    if (best) starts.push_back(best->argmin);
    for (const auto& v : starting_points(prog, method, data)) starts.push_back(v);
    // Re-converging onto the positive optimum can shave an ulp off Q, and the
    // tail function is not monotone at that scale; keep the positive result
    // unless the whole box offers a real improvement.
    const auto whole = best_descent(prog, starts);
    if (whole && (!best || whole->value < best->value - 1e-12 * (1.0 + best->value))) best = whole;
  }
  if (!best)
    throw ConvergenceError("nuisance optimisation did not converge within the iteration budget: " +
                           describe(rho0, est, design, method));

  NuisanceSolution out;
  const double v2 = best->argmin[0];
  const double v3 = best->argmin[1];
  if (method == Method::Cronbach)
    out.nuisance = {v2 * v2, v3 * v3};
  else
    out.nuisance = {std::tanh(v2), std::tanh(v3)};
  out.objective = std::max(0.0, best->value);
  return out;
}

PValueResult pvalue(double rho0, const EstimateSet& est, const StudyDesign& design, Method method) {
  if (method == Method::HS) {
    validate(est, design, method);
    if (!std::isfinite(rho0)) throw std::domain_error("rho must be finite");
    const double attenuation = std::sqrt(est.rel2) * std::sqrt(est.rel3);
    const double z = (est.r1 - rho0 * attenuation) * std::sqrt(static_cast<double>(design.n1 - 1)) /
                     (1.0 - est.r1 * est.r1);
    return {2.0 * normal_cdf(-std::fabs(z)), std::nullopt, z * z};
  }

  const auto solution = solve_nuisance(rho0, est, design, method);
  return {chisq3_sf(solution.objective), solution.nuisance, solution.objective};
}

HsInterval hs_interval(const EstimateSet& est, const StudyDesign& design, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::domain_error("level must lie in (0, 1)");
  validate(est, design, Method::HS);

  const double attenuation = std::sqrt(est.rel2) * std::sqrt(est.rel3);
  const double center = est.r1 / attenuation;
  const double half_width = normal_quantile(0.5 * (1.0 + level)) * (1.0 - est.r1 * est.r1) /
                            (std::sqrt(static_cast<double>(design.n1 - 1)) * attenuation);

  HsInterval out;
  out.raw_lo = center - half_width;
  out.raw_hi = center + half_width;
  out.intersects = out.raw_hi >= -1.0 && out.raw_lo <= 1.0;
  out.lo = std::clamp(out.raw_lo, -1.0, 1.0);
  out.hi = std::clamp(out.raw_hi, -1.0, 1.0);
  return out;
}

}  // namespace attenuation
