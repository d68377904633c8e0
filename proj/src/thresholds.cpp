#include "cepp/thresholds.hpp"

#include <cmath>
#include <limits>

namespace cepp {

ReproductionData reproduction_numbers(const MultiStrainModel& model, const FaceEquilibrium& eq) {
  if (!eq.exists()) throw DomainError("reproduction numbers need an existing face equilibrium");
  ReproductionData data;
  data.s_value = eq.state(0);
  for (int j = 0; j < model.strain_count(); ++j) {
    const double slope = model.reproduction_slope(j);
    data.slope.push_back(slope);
    data.at_state.push_back(data.s_value * slope);
  }
  return data;
}

TransversalJacobian transversal_jacobian(const MultiStrainModel& model, const FaceEquilibrium& eq) {
  if (!eq.exists()) throw DomainError("transversal Jacobian needs an existing face equilibrium");
  const double s = eq.state(0);
  TransversalJacobian out;
  out.absent = eq.absent;
  for (int j : eq.absent) {
    if (model.is_scalar(j)) {
      const auto& sc = model.scalar(j);
      Matrix m(1, 1);
      m(0, 0) = sc.beta * s - sc.v;  // v_j (R_j(s) - 1)
      out.blocks.emplace_back(m);
      out.abscissae.push_back(m(0, 0));
    } else {
      const auto& blk = model.block(j);
      Matrix m = s * blk.w * blk.ell.transpose();
      m -= Matrix(blk.vdiag.asDiagonal());
      MetzlerMatrix metzler(m);
      out.abscissae.push_back(spectral_abscissa(metzler));
      out.blocks.push_back(std::move(metzler));
    }
  }
  return out;
}

bool TransversalJacobian::hurwitz() const {
  for (double a : abscissae)
    if (a >= 0.0) return false;
  return true;
}

double TransversalJacobian::max_abscissa() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double a : abscissae) m = std::max(m, a);
  return m;
}

bool sign_equivalence_check(const MetzlerMatrix& block, double R, double tol) {
  const double abscissa = spectral_abscissa(block);
  if (std::abs(R - 1.0) < tol) return std::abs(abscissa) < tol;
  return (abscissa > 0.0) == (R > 1.0);
}

}  // namespace cepp
