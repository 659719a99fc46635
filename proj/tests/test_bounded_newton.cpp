#include <doctest.h>

#include <cmath>

#include "attenuation/detail/bounded_newton.hpp"

using namespace attenuation::detail;

namespace {

// (x - a)^2 + 10 (y - b)^2 + x y
SecondOrderFunction skewed_quadratic(double a, double b) {
  return [a, b](const Vec2& v) {
    SecondOrder s;
    s.value = (v[0] - a) * (v[0] - a) + 10.0 * (v[1] - b) * (v[1] - b) + v[0] * v[1];
    s.gradient = {2.0 * (v[0] - a) + v[1], 20.0 * (v[1] - b) + v[0]};
    s.hessian = {{{2.0, 1.0}, {1.0, 20.0}}};
    return s;
  };
}

SecondOrderFunction rosenbrock() {
  return [](const Vec2& v) {
    const double x = v[0], y = v[1];
    SecondOrder s;
    s.value = (1 - x) * (1 - x) + 100 * (y - x * x) * (y - x * x);
    s.gradient = {-2 * (1 - x) - 400 * x * (y - x * x), 200 * (y - x * x)};
    s.hessian = {{{2 - 400 * y + 1200 * x * x, -400 * x}, {-400 * x, 200.0}}};
    return s;
  };
}

}  // namespace

TEST_CASE("interior minimum of a quadratic") {
  const Box box{{-10, -10}, {10, 10}};
  const auto r = minimize_in_box(skewed_quadratic(1.0, 2.0), box, {5.0, -5.0});
  REQUIRE(r.converged);
  // Stationary point: 2x + y = 2, x + 20y = 40.
  CHECK(std::fabs(r.argmin[0] - 0.0) < 1e-10);
  CHECK(std::fabs(r.argmin[1] - 2.0) < 1e-10);
}

TEST_CASE("minimum on a face of the box") {
  // Unconstrained minimiser has x = 3 > upper bound 1.
  const Box box{{-1, -1}, {1, 1}};
  const auto r = minimize_in_box(skewed_quadratic(3.0, 0.0), box, {0.0, 0.0});
  REQUIRE(r.converged);
  CHECK(r.argmin[0] == 1.0);
  CHECK(r.argmin[1] == doctest::Approx(-1.0 / 20.0).epsilon(1e-10));
}

TEST_CASE("minimum at a corner") {
  const Box box{{0, 0}, {1, 1}};
  const auto r = minimize_in_box(skewed_quadratic(-5.0, -5.0), box, {0.5, 0.5});
  REQUIRE(r.converged);
  CHECK(r.argmin[0] == 0.0);
  CHECK(r.argmin[1] == 0.0);
}

TEST_CASE("nonconvex valley") {
  const Box box{{-2, -2}, {2, 2}};
  const auto r = minimize_in_box(rosenbrock(), box, {-1.5, 1.8});
  REQUIRE(r.converged);
  CHECK(r.argmin[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.argmin[1] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.value < 1e-14);
}

TEST_CASE("start outside the box is projected") {
  const Box box{{0, 0}, {1, 1}};
  const auto r = minimize_in_box(skewed_quadratic(0.5, 0.5), box, {9.0, -9.0});
  REQUIRE(r.converged);
  CHECK(r.argmin[0] >= 0.0);
  CHECK(r.argmin[1] <= 1.0);
}

TEST_CASE("iteration budget is reported") {
  const Box box{{-2, -2}, {2, 2}};
  NewtonOptions opts;
  opts.max_iterations = 2;
  const auto r = minimize_in_box(rosenbrock(), box, {-1.5, 1.8}, opts);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 2);
}
