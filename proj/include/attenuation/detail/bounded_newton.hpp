#pragma once

#include <array>
#include <functional>

namespace attenuation::detail {

using Vec2 = std::array<double, 2>;

/// Value, gradient and Hessian of a smooth function of two variables.
struct SecondOrder {
  double value = 0.0;
  Vec2 gradient{};
  std::array<Vec2, 2> hessian{};
};

using SecondOrderFunction = std::function<SecondOrder(const Vec2&)>;

struct Box {
  Vec2 lower;
  Vec2 upper;

  [[nodiscard]] Vec2 project(Vec2 x) const;
};

struct NewtonOptions {
  double step_tolerance = 1e-10;
  double gradient_tolerance = 1e-12;
  int max_iterations = 10000;
};

struct NewtonResult {
  Vec2 argmin{};
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Projected Newton iteration for a box-constrained problem in two
/// variables. Coordinates sitting on a bound with the gradient pushing
/// outward are frozen for the step; the remaining block takes a Newton step
/// when its Hessian is positive definite and a scaled gradient step
/// otherwise. Steps are accepted by Armijo backtracking along the projected
/// path.
NewtonResult minimize_in_box(const SecondOrderFunction& f, const Box& box, Vec2 start,
                             const NewtonOptions& options = {});

}  // namespace attenuation::detail
