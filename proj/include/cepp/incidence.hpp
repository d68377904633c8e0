#pragma once

#include <utility>
#include <vector>

#include "cepp/common.hpp"

namespace cepp {

enum class IncidenceKind { Linear, MichaelisMenten, TabulatedConcave };

/// Saturating transmission nonlinearity f with f(0) = 0 and f'(0) = 1,
/// increasing and concave. The slope ratio g(i) = f(i)/i (g(0) = 1) is
/// nonincreasing, strictly decreasing away from the linear case.
class IncidenceFunction {
 public:
  static IncidenceFunction linear();
  static IncidenceFunction michaelis_menten(double alpha);

  /// Monotone-concave piecewise-linear interpolation of user samples,
  /// rescaled so the initial slope is exactly 1. Sample points are validated
  /// (increasing, concave), never assumed.
  static IncidenceFunction tabulated(std::vector<std::pair<double, double>> points);

  double value(double i) const;        ///< f(i)
  double slope_ratio(double i) const;  ///< g(i) = f(i)/i, g(0) = 1

  IncidenceKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  const std::vector<std::pair<double, double>>& points() const { return points_; }

  /// Coexistence analysis needs the slope-ratio dichotomy: either g is the
  /// constant 1 or g is strictly decreasing on (0, inf). Piecewise-linear
  /// tables are constant-1 on their first segment, so any table with more
  /// than one segment is Mixed and rejected where the dichotomy is required.
  enum class GClass { Identity, StrictlyDecreasing, Mixed };
  GClass g_class() const;

 private:
  IncidenceFunction(IncidenceKind kind, double alpha,
                    std::vector<std::pair<double, double>> points)
      : kind_(kind), alpha_(alpha), points_(std::move(points)) {}

  IncidenceKind kind_;
  double alpha_ = 0.0;
  std::vector<std::pair<double, double>> points_;  // tabulated only, rescaled
};

}  // namespace cepp
