#include "cepp/incidence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cepp {

IncidenceFunction IncidenceFunction::linear() {
  return IncidenceFunction(IncidenceKind::Linear, 0.0, {});
}

IncidenceFunction IncidenceFunction::michaelis_menten(double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("Michaelis-Menten incidence requires alpha > 0");
  return IncidenceFunction(IncidenceKind::MichaelisMenten, alpha, {});
}

IncidenceFunction IncidenceFunction::tabulated(std::vector<std::pair<double, double>> points) {
  std::sort(points.begin(), points.end());
  if (points.empty() || points.front().first > 0.0)
    points.insert(points.begin(), {0.0, 0.0});
  if (points.front().first != 0.0 || points.front().second != 0.0)
    throw InvalidArgument("tabulated incidence must start at (0, 0)");
  if (points.size() < 2) throw InvalidArgument("tabulated incidence needs at least one positive sample");

  std::vector<double> slopes;
  for (std::size_t k = 1; k < points.size(); ++k) {
    const double di = points[k].first - points[k - 1].first;
    const double df = points[k].second - points[k - 1].second;
    if (!(di > 0.0)) throw InvalidArgument("tabulated incidence has duplicate abscissae");
    if (!(df > 0.0)) throw InvalidArgument("tabulated incidence must be strictly increasing");
    slopes.push_back(df / di);
  }
  for (std::size_t k = 1; k < slopes.size(); ++k)
    if (slopes[k] > slopes[k - 1] + 1e-12)
      throw InvalidArgument("tabulated incidence is not concave (segment slopes increase)");

  // rescale so f'(0) = 1
  const double s0 = slopes.front();
  for (auto& p : points) p.second /= s0;
  return IncidenceFunction(IncidenceKind::TabulatedConcave, 0.0, std::move(points));
}

double IncidenceFunction::value(double i) const {
  switch (kind_) {
    case IncidenceKind::Linear:
      return i;
    case IncidenceKind::MichaelisMenten:
      return i / (1.0 + alpha_ * i);
    case IncidenceKind::TabulatedConcave: {
      if (i <= 0.0) return 0.0;
      auto it = std::upper_bound(points_.begin(), points_.end(), std::make_pair(i, 0.0),
                                 [](const auto& a, const auto& b) { return a.first < b.first; });
      if (it == points_.end()) {
        // linear continuation at the final slope keeps f increasing concave
        const auto& a = points_[points_.size() - 2];
        const auto& b = points_.back();
        const double slope = (b.second - a.second) / (b.first - a.first);
        return b.second + slope * (i - b.first);
      }
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double t = (i - lo.first) / (hi.first - lo.first);
      return lo.second + t * (hi.second - lo.second);
    }
  }
  return 0.0;
}

double IncidenceFunction::slope_ratio(double i) const {
  if (i == 0.0) return 1.0;
  if (kind_ == IncidenceKind::MichaelisMenten) return 1.0 / (1.0 + alpha_ * i);
  if (kind_ == IncidenceKind::Linear) return 1.0;
  return value(i) / i;
}

IncidenceFunction::GClass IncidenceFunction::g_class() const {
  switch (kind_) {
    case IncidenceKind::Linear:
      return GClass::Identity;
    case IncidenceKind::MichaelisMenten:
      return GClass::StrictlyDecreasing;
    case IncidenceKind::TabulatedConcave:
      // a single-segment table is exactly f(i) = i after rescaling
      return points_.size() == 2 ? GClass::Identity : GClass::Mixed;
  }
  return GClass::Mixed;
}

}  // namespace cepp
