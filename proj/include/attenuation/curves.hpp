#pragma once

#include <functional>
#include <iosfwd>
#include <string_view>
#include <utility>
#include <vector>

#include "attenuation/inference.hpp"

namespace attenuation {

/// Sampled confidence curve rho -> 1 - p(rho) on [-1, 1].
struct ConfidenceCurve {
  std::vector<double> grid;
  std::vector<double> cc;
  Method method = Method::Corr;
  EstimateSet est;
  StudyDesign design;
};

enum class SetKind { Empty, Interval, Full, NonInterval };

std::string_view to_string(SetKind kind);

struct ConfidenceSet {
  double level = 0.95;
  SetKind kind = SetKind::Empty;
  /// Disjoint closed pieces in increasing order. Empty for SetKind::Empty,
  /// a single [-1, 1] piece for SetKind::Full.
  std::vector<std::pair<double, double>> pieces;
};

inline constexpr int kDefaultSetGrid = 512;
inline constexpr int kDefaultCurveGrid = 200;

/// Evaluates 1 - p at `grid_n` equally spaced points covering [-1, 1].
/// Requires grid_n >= 16.
ConfidenceCurve confidence_curve(const EstimateSet& est, const StudyDesign& design, Method method,
                                 int grid_n = kDefaultCurveGrid);

/// The set {rho in [-1, 1] : p(rho) >= 1 - level}. Boundaries are located by
/// scanning `grid_n` points for sign changes of p - alpha and bisecting each
/// crossing. For HS the closed-form interval clipped to [-1, 1] is returned.
ConfidenceSet confidence_set(const EstimateSet& est, const StudyDesign& design, Method method,
                             double level, int grid_n = kDefaultSetGrid);

/// Minimiser of a sampled curve, refined by golden-section search between the
/// neighbours of the best grid point. `evaluate` must return the curve value
/// at any rho in [-1, 1]. Ties go to the smallest |rho|.
double curve_minimizer(const ConfidenceCurve& curve, const std::function<double(double)>& evaluate);

/// As above, re-evaluating the curve from its recorded inputs.
double curve_minimizer(const ConfidenceCurve& curve);

/// CSV with header `rho,cc,method`, 17 significant digits.
void write_curve_csv(std::ostream& out, const ConfidenceCurve& curve);

/// Minimal SVG line plot of the curve with a horizontal rule at `level`.
void write_curve_svg(std::ostream& out, const ConfidenceCurve& curve, double level = 0.95);

}  // namespace attenuation
