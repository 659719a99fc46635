#include "attenuation/detail/bounded_newton.hpp"

#include <algorithm>
#include <cmath>

namespace attenuation::detail {

Vec2 Box::project(Vec2 x) const {
  for (int i = 0; i < 2; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  return x;
}

namespace {

// Search direction on the free coordinates; frozen coordinates get 0.
Vec2 direction(const SecondOrder& s, const std::array<bool, 2>& free, bool newton) {
  Vec2 d{0.0, 0.0};
  const auto& g = s.gradient;
  const auto& h = s.hessian;

  if (free[0] && free[1]) {
    const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if (newton && h[0][0] > 0.0 && det > 0.0) {
      d[0] = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
      d[1] = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
      return d;
    }
  } else {
    for (int i = 0; i < 2; ++i) {
      if (free[i] && newton && h[i][i] > 0.0) {
        d[i] = -g[i] / h[i][i];
        return d;
      }
    }
  }

  // Gradient fallback with diagonal scaling. The curvatures of the two
  // coordinates can differ by orders of magnitude near the upper bound, so a
  // shared scale would stall the flat coordinate.
  double largest = 0.0;
  for (int i = 0; i < 2; ++i)
    if (free[i] && std::isfinite(h[i][i])) largest = std::max(largest, std::fabs(h[i][i]));
  for (int i = 0; i < 2; ++i) {
    if (!free[i]) continue;
    double scale = std::fabs(h[i][i]);
    if (!std::isfinite(scale) || scale <= 1e-8 * largest) scale = largest > 0.0 ? 1e-8 * largest : 1.0;
    if (!(scale > 0.0)) scale = 1.0;
    d[i] = -g[i] / scale;
  }
  return d;
}

struct LineSearchOutcome {
  bool accepted = false;
  Vec2 x{};
  SecondOrder eval{};
};

LineSearchOutcome backtrack(const SecondOrderFunction& f, const Box& box, const Vec2& x,
                            const SecondOrder& at_x, const Vec2& d) {
  constexpr double armijo = 1e-4;
  double t = 1.0;
  for (int k = 0; k < 60; ++k, t *= 0.5) {
    const Vec2 trial = box.project({x[0] + t * d[0], x[1] + t * d[1]});
    if (trial == x) break;
    const double decrease = at_x.gradient[0] * (trial[0] - x[0]) +
                            at_x.gradient[1] * (trial[1] - x[1]);
    auto eval = f(trial);
    if (!std::isfinite(eval.value)) continue;
    if (eval.value <= at_x.value + armijo * decrease) return {true, trial, eval};
  }
  return {};
}

}  // namespace

NewtonResult minimize_in_box(const SecondOrderFunction& f, const Box& box, Vec2 start,
                             const NewtonOptions& options) {
  Vec2 x = box.project(start);
  SecondOrder current = f(x);

  NewtonResult result;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;

    // Coordinates pinned at a bound by an outward-pointing gradient.
    std::array<bool, 2> free{true, true};
    double projected_gradient = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double g = current.gradient[i];
      const double width = box.upper[i] - box.lower[i];
      const double slack = std::min(1e-12 * std::max(1.0, width), std::fabs(g));
      const bool at_lower = x[i] - box.lower[i] <= slack && g > 0.0;
      const bool at_upper = box.upper[i] - x[i] <= slack && g < 0.0;
      free[i] = !(at_lower || at_upper);
      if (free[i]) projected_gradient = std::max(projected_gradient, std::fabs(g));
    }
    if (projected_gradient <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }

    auto step = backtrack(f, box, x, current, direction(current, free, true));
    if (!step.accepted) step = backtrack(f, box, x, current, direction(current, free, false));
    if (!step.accepted) {
      // No descent available at working precision: x is stationary to within
      // rounding of the objective.
      result.converged = true;
      break;
    }

    const double moved = std::max(std::fabs(step.x[0] - x[0]), std::fabs(step.x[1] - x[1]));
    const double drop = current.value - step.eval.value;
    x = step.x;
    current = step.eval;
    if (moved <= options.step_tolerance * (1.0 + std::max(std::fabs(x[0]), std::fabs(x[1]))) &&
        drop <= 1e-14 * (1.0 + std::fabs(current.value))) {
      result.converged = true;
      break;
    }
  }

  result.argmin = x;
  result.value = current.value;
  return result;
}

}  // namespace attenuation::detail
