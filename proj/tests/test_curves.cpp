#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "attenuation/curves.hpp"
#include "oracles.hpp"

using namespace attenuation;

namespace {

const EstimateSet kListing{0.20, std::sqrt(0.45), std::sqrt(0.55)};
const EstimateSet kExample1{0.57, std::sqrt(0.56), std::sqrt(0.55)};
const EstimateSet kExample2{0.52, std::sqrt(0.79), std::sqrt(0.79)};
const StudyDesign kExample2Design{85, 2028, 711, std::nullopt, std::nullopt};

bool contains(const ConfidenceSet& set, double x, double slack = 1e-9) {
  for (const auto& [lo, hi] : set.pieces)
    if (x >= lo - slack && x <= hi + slack) return true;
  return false;
}

}  // namespace

TEST_CASE("confidence_curve basics") {
  const auto curve = confidence_curve(kListing, StudyDesign::uniform(100), Method::Corr, 200);
  REQUIRE(curve.grid.size() == 200);
  CHECK(curve.grid.front() == -1.0);
  CHECK(curve.grid.back() == 1.0);
  for (std::size_t i = 1; i < curve.grid.size(); ++i) CHECK(curve.grid[i] > curve.grid[i - 1]);
  for (double v : curve.cc) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  // The curve crosses 0.95 close to the known interval endpoints.
  int crossings = 0;
  for (std::size_t i = 1; i < curve.cc.size(); ++i) {
    if ((curve.cc[i - 1] - 0.95) * (curve.cc[i] - 0.95) < 0.0) {
      ++crossings;
      const double mid = 0.5 * (curve.grid[i - 1] + curve.grid[i]);
      const bool near = std::fabs(mid + 0.1647) < 0.011 || std::fabs(mid - 0.9959) < 0.011;
      CHECK(near);
    }
  }
  CHECK(crossings == 2);

  CHECK_THROWS_AS(confidence_curve(kListing, StudyDesign::uniform(100), Method::Corr, 15),
                  std::invalid_argument);
}

TEST_CASE("curve vanishes at the plug-in estimate") {
  const EstimateSet est{0.3, 0.7, 0.8};
  const StudyDesign d = StudyDesign::uniform(90);
  const double plug_in = point_estimate(est, Method::Corr);
  const auto curve = confidence_curve(est, d, Method::Corr, 64);
  const auto eval = [&](double rho) { return 1.0 - pvalue(rho, est, d, Method::Corr).p; };
  CHECK(eval(plug_in) < 1e-6);
  CHECK(std::fabs(curve_minimizer(curve) - plug_in) < 1e-3);
}

TEST_CASE("curves are deterministic") {
  const auto a = confidence_curve(kExample1, StudyDesign::uniform(488), Method::Free, 100);
  const auto b = confidence_curve(kExample1, StudyDesign::uniform(488), Method::Free, 100);
  CHECK(a.cc == b.cc);
}

TEST_CASE("confidence_set reproduces the worked examples") {
  const auto listing = confidence_set(kListing, StudyDesign::uniform(100), Method::Corr, 0.95);
  REQUIRE(listing.kind == SetKind::Interval);
  CHECK(std::fabs(listing.pieces[0].first + 0.1647174) < 1e-3);
  CHECK(std::fabs(listing.pieces[0].second - 0.9958587) < 1e-3);

  const auto ex1 = confidence_set(kExample1, StudyDesign::uniform(488), Method::Corr, 0.95);
  REQUIRE(ex1.kind == SetKind::Interval);
  CHECK(std::fabs(ex1.pieces[0].first - 0.84) < 0.02);
  CHECK(ex1.pieces[0].second == 1.0);

  const auto ex2 = confidence_set(kExample2, kExample2Design, Method::Corr, 0.95);
  REQUIRE(ex2.kind == SetKind::Interval);
  CHECK(std::fabs(ex2.pieces[0].first - 0.33) < 0.02);
  CHECK(std::fabs(ex2.pieces[0].second - 0.90) < 0.02);
}

TEST_CASE("HS confidence_set is the clipped closed form") {
  const EstimateSet rel{0.57, 0.56, 0.55};
  const StudyDesign d = StudyDesign::uniform(488);
  const auto set = confidence_set(rel, d, Method::HS, 0.95);
  const auto hs = hs_interval(rel, d, 0.95);
  REQUIRE(set.kind == SetKind::Interval);
  CHECK(std::fabs(set.pieces[0].first - hs.lo) < 1e-9);
  CHECK(std::fabs(set.pieces[0].second - hs.hi) < 1e-9);

  // Tiny sample: HS interval swallows [-1, 1].
  const auto full = confidence_set({0.1, 0.2, 0.2}, StudyDesign::uniform(5), Method::HS, 0.95);
  CHECK(full.kind == SetKind::Full);

  // Interval entirely above 1.
  const auto none = confidence_set({0.9, 0.5, 0.5}, StudyDesign::uniform(5000), Method::HS, 0.95);
  CHECK(none.kind == SetKind::Empty);
  CHECK(none.pieces.empty());
}

TEST_CASE("full and empty sets for model-based methods") {
  // Very little information: every rho in [-1, 1] is accepted.
  const auto full = confidence_set({0.1, 0.5, 0.5}, StudyDesign::uniform(6), Method::Corr, 0.95);
  CHECK(full.kind == SetKind::Full);
  REQUIRE(full.pieces.size() == 1);
  CHECK(full.pieces[0].first == -1.0);
  CHECK(full.pieces[0].second == 1.0);

  // Observed correlation far larger than the reliability indices allow.
  const auto empty = confidence_set({0.95, 0.3, 0.3}, StudyDesign::uniform(5000), Method::Corr, 0.95);
  CHECK(empty.kind == SetKind::Empty);
}

TEST_CASE("endpoints are p-value crossings") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 10; ++i) {
    const auto inst = oracle::random_instance(rng, Method::Corr);
    for (double level : {0.8, 0.95}) {
      const auto set = confidence_set(inst.est, inst.design, Method::Corr, level);
      for (const auto& [lo, hi] : set.pieces) {
        for (double e : {lo, hi}) {
          if (e == -1.0 || e == 1.0) continue;
          CHECK(std::fabs(pvalue(e, inst.est, inst.design, Method::Corr).p - (1.0 - level)) <= 1e-5);
        }
      }
    }
  }
}

TEST_CASE("sets are nested in the level and contain the curve minimiser") {
  std::mt19937_64 rng(23);
  for (Method m : {Method::Corr, Method::Cronbach}) {
    for (int i = 0; i < 6; ++i) {
      const auto inst = oracle::random_instance(rng, m);
      const auto curve = confidence_curve(inst.est, inst.design, m, 128);
      const double minimiser = curve_minimizer(curve);
      ConfidenceSet previous;
      bool first = true;
      for (double level : {0.5, 0.8, 0.9, 0.95, 0.99}) {
        const auto set = confidence_set(inst.est, inst.design, m, level);
        if (!set.pieces.empty()) CHECK(contains(set, minimiser, 1e-6));
        if (!first)
          for (const auto& [lo, hi] : previous.pieces) {
            CHECK(contains(set, lo));
            CHECK(contains(set, hi));
          }
        previous = set;
        first = false;
      }
    }
  }
}

TEST_CASE("curve_minimizer") {
  const auto ex1 = confidence_curve(kExample1, StudyDesign::uniform(488), Method::Corr, 200);
  CHECK(curve_minimizer(ex1) == 1.0);

  ConfidenceCurve flat;
  for (int i = 0; i < 200; ++i) flat.grid.push_back(-1.0 + 2.0 * i / 199.0);
  flat.cc.assign(200, 0.3);
  CHECK(curve_minimizer(flat, [](double) { return 0.3; }) == 0.0);

  ConfidenceCurve empty;
  CHECK_THROWS_AS(curve_minimizer(empty, [](double) { return 0.0; }), std::invalid_argument);
}

TEST_CASE("curve csv layout") {
  const auto curve = confidence_curve(kExample1, StudyDesign::uniform(488), Method::Corr, 16);
  std::ostringstream os;
  write_curve_csv(os, curve);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "rho,cc,method");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(line.substr(line.size() - 5) == ",corr");
  }
  CHECK(rows == 16);
  CHECK(os.str().find("\n-1,") != std::string::npos);

  std::ostringstream svg;
  write_curve_svg(svg, curve);
  CHECK(svg.str().find("<polyline") != std::string::npos);
}
