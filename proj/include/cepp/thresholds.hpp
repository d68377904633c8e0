#pragma once

#include <vector>

#include "cepp/common.hpp"
#include "cepp/equilibria.hpp"
#include "cepp/linalg.hpp"
#include "cepp/model.hpp"

namespace cepp {

/// Reproduction functions evaluated at a face equilibrium's susceptible
/// level: R_j(s) = s * slope_j, with slope beta/v for scalar strains and
/// l^T V^{-1} w for blocks. At the DFE these are the basic numbers; at
/// boundary equilibria the entries for absent strains are invasion numbers.
struct ReproductionData {
  double s_value;
  std::vector<double> slope;
  std::vector<double> at_state;
};

ReproductionData reproduction_numbers(const MultiStrainModel& model, const FaceEquilibrium& eq);

/// Per-absent-strain Metzler blocks of the Jacobian at a face equilibrium:
/// v_j (R_j(s_E) - 1) for scalar strains, s_E w l^T - V for blocks. The
/// abscissa sign matches sign(R_strain(s_E) - 1) for every block.
struct TransversalJacobian {
  std::vector<int> absent;
  std::vector<MetzlerMatrix> blocks;
  std::vector<double> abscissae;

  bool hurwitz() const;
  double max_abscissa() const;
};

TransversalJacobian transversal_jacobian(const MultiStrainModel& model, const FaceEquilibrium& eq);

/// Self-test for rank-one blocks s w l^T - V: the abscissa sign must equal
/// the sign of R - 1 within tolerance.
bool sign_equivalence_check(const MetzlerMatrix& block, double R, double tol = 1e-9);

}  // namespace cepp
