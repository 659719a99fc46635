#include "attenuation/curves.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace attenuation {

std::string_view to_string(SetKind kind) {
  switch (kind) {
    case SetKind::Empty: return "empty";
    case SetKind::Interval: return "interval";
    case SetKind::Full: return "full";
    case SetKind::NonInterval: return "non_interval";
  }
  return "unknown";
}

namespace {

std::vector<double> unit_grid(int n) {
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[i] = -1.0 + 2.0 * i / (n - 1);
  grid.front() = -1.0;
  grid.back() = 1.0;
  return grid;
}

// Boundary between an accepted and a rejected point; `inside` has f >= 0.
double bisect_boundary(const std::function<double(double)>& f, double inside, double outside) {
  for (int i = 0; i < 100 && std::fabs(inside - outside) > 1e-12; ++i) {
    const double mid = 0.5 * (inside + outside);
    if (f(mid) >= 0.0)
      inside = mid;
    else
      outside = mid;
  }
  return inside;
}

// Golden-section minimisation of f on [lo, hi].
double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::domain_error("level must lie in (0, 1)");
}

ConfidenceSet classify(double level, std::vector<std::pair<double, double>> pieces) {
  ConfidenceSet set;
  set.level = level;
  if (pieces.empty())
    set.kind = SetKind::Empty;
  else if (pieces.size() > 1)
    set.kind = SetKind::NonInterval;
  else if (pieces.front().first == -1.0 && pieces.front().second == 1.0)
    set.kind = SetKind::Full;
  else
    set.kind = SetKind::Interval;
  set.pieces = std::move(pieces);
  return set;
}

}  // namespace

ConfidenceCurve confidence_curve(const EstimateSet& est, const StudyDesign& design, Method method,
                                 int grid_n) {
  if (grid_n < 16) throw std::invalid_argument("confidence_curve: grid must have at least 16 points");
  validate(est, design, method);

  ConfidenceCurve curve;
  curve.method = method;
  curve.est = est;
  curve.design = design;
  curve.grid = unit_grid(grid_n);
  curve.cc.reserve(curve.grid.size());
  for (double rho : curve.grid) curve.cc.push_back(1.0 - pvalue(rho, est, design, method).p);
  return curve;
}

ConfidenceSet confidence_set(const EstimateSet& est, const StudyDesign& design, Method method,
                             double level, int grid_n) {
  check_level(level);
  if (grid_n < 16) throw std::invalid_argument("confidence_set: grid must have at least 16 points");

  if (method == Method::HS) {
    const auto hs = hs_interval(est, design, level);
    if (!hs.intersects) return classify(level, {});
    return classify(level, {{hs.lo, hs.hi}});
  }

  validate(est, design, method);
  const double alpha = 1.0 - level;
  const std::function<double(double)> excess = [&](double rho) {
    return pvalue(rho, est, design, method).p - alpha;
  };

  const auto grid = unit_grid(grid_n);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = excess(grid[i]);

  std::vector<std::pair<double, double>> pieces;
  std::size_t i = 0;
  while (i < grid.size()) {
    if (values[i] < 0.0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < grid.size() && values[j + 1] >= 0.0) ++j;
    const double lo = i == 0 ? -1.0 : bisect_boundary(excess, grid[i], grid[i - 1]);
    const double hi = j + 1 == grid.size() ? 1.0 : bisect_boundary(excess, grid[j], grid[j + 1]);
    pieces.emplace_back(lo, hi);
    i = j + 1;
  }

  if (pieces.empty()) {
    // The accepted region may be narrower than the grid spacing: look for it
    // around the largest p-value.
    const auto best = static_cast<std::size_t>(
        std::max_element(values.begin(), values.end()) - values.begin());
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    const double peak = golden_section([&](double rho) { return -excess(rho); }, lo, hi, 1e-10);
    if (excess(peak) >= 0.0) {
      const double left = lo < peak && excess(lo) < 0.0 ? bisect_boundary(excess, peak, lo) : lo;
      const double right = hi > peak && excess(hi) < 0.0 ? bisect_boundary(excess, peak, hi) : hi;
      pieces.emplace_back(left, right);
    }
  }

  return classify(level, std::move(pieces));
}

double curve_minimizer(const ConfidenceCurve& curve,
                       const std::function<double(double)>& evaluate) {
  if (curve.grid.empty() || curve.grid.size() != curve.cc.size())
    throw std::invalid_argument("curve_minimizer: curve is empty or malformed");

  constexpr double tie = 1e-12;
  const auto better = [](double va, double ra, double vb, double rb) {
    if (va < vb - tie) return true;
    if (vb < va - tie) return false;
    return std::fabs(ra) < std::fabs(rb);
  };

  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.grid.size(); ++i)
    if (better(curve.cc[i], curve.grid[i], curve.cc[best], curve.grid[best])) best = i;

  const double lo = curve.grid[best == 0 ? 0 : best - 1];
  const double hi = curve.grid[std::min(best + 1, curve.grid.size() - 1)];

  std::vector<double> candidates{curve.grid[best], lo, hi};
  if (hi > lo) candidates.push_back(golden_section(evaluate, lo, hi, 1e-7));
  if (lo <= 0.0 && hi >= 0.0) candidates.push_back(0.0);

  double arg = candidates.front();
  double val = evaluate(arg);
  for (double c : candidates) {
    const double v = evaluate(c);
    if (better(v, c, val, arg)) {
      arg = c;
      val = v;
    }
  }
  return arg;
}

double curve_minimizer(const ConfidenceCurve& curve) {
  return curve_minimizer(curve, [&curve](double rho) {
    return 1.0 - pvalue(rho, curve.est, curve.design, curve.method).p;
  });
}

void write_curve_csv(std::ostream& out, const ConfidenceCurve& curve) {
  out << "rho,cc,method\n";
  char buf[96];
  const std::string method(to_string(curve.method));
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,", curve.grid[i], curve.cc[i]);
    out << buf << method << '\n';
  }
}

void write_curve_svg(std::ostream& out, const ConfidenceCurve& curve, double level) {
  constexpr double width = 640.0, height = 400.0, margin = 40.0;
  const auto px = [&](double rho) { return margin + (rho + 1.0) / 2.0 * (width - 2 * margin); };
  const auto py = [&](double cc) { return height - margin - cc * (height - 2 * margin); };
  char buf[128];

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin
      << "\" height=\"" << height - 2 * margin << "\" fill=\"none\" stroke=\"#888\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"#c33\" "
                "stroke-dasharray=\"4 3\"/>\n",
                px(-1.0), py(level), px(1.0), py(level));
  out << buf;
  out << "<polyline fill=\"none\" stroke=\"#000\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", px(curve.grid[i]), py(curve.cc[i]));
    out << buf;
  }
  out << "\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"" << height - 10 << "\" font-size=\"12\">rho ("
      << to_string(curve.method) << ")</text>\n";
  out << "</svg>\n";
}

}  // namespace attenuation
