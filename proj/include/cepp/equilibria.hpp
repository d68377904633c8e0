#pragma once

#include <string>
#include <vector>

#include "cepp/common.hpp"
#include "cepp/model.hpp"

namespace cepp {

struct InequalityRecord {
  std::string quantity;  ///< e.g. "R_1", "R_b(E_1)"
  double value;
  double threshold;
  char direction;  ///< '>' or '<'
  bool satisfied() const { return direction == '>' ? value > threshold : value < threshold; }
  double margin() const { return std::abs(value - threshold); }
};

enum class FaceStatus {
  Exists,
  NotExisting,
  Degenerate,   ///< tie surface: a continuum, no isolated equilibrium
  Unsupported,  ///< face shape outside the constructive cases
};

/// Equilibria whose defining inequality sits within this band of equality are
/// flagged near-nonhyperbolic and excluded from global-stability claims.
inline constexpr double kThresholdBand = 1e-9;

/// A siphon-lattice node (the set of absent strains) together with the
/// equilibrium on that face.
struct FaceEquilibrium {
  std::vector<int> absent;
  ModelState state;  ///< zero-filled when the equilibrium does not exist
  FaceStatus status = FaceStatus::NotExisting;
  bool near_nonhyperbolic = false;
  double residual = 0.0;  ///< ||f(state)||_inf when it exists
  std::vector<InequalityRecord> existence_conditions;

  bool exists() const { return status == FaceStatus::Exists; }
  std::vector<int> present(int strain_count) const;
  bool is_absent(int j) const;
};

FaceEquilibrium dfe(const MultiStrainModel& model);

/// Boundary equilibrium with only scalar strain j present. Closed form for
/// linear incidence, certified bisection otherwise.
FaceEquilibrium scalar_boundary(const MultiStrainModel& model, int j);

/// Boundary equilibrium with only rank-one block j present (closed form).
FaceEquilibrium block_boundary(const MultiStrainModel& model, int j);

/// Coexistence of the two scalar strains j and k, all others absent.
FaceEquilibrium coexistence(const MultiStrainModel& model, int j, int k);
/// Two-scalar-strain model convenience overload.
FaceEquilibrium coexistence(const MultiStrainModel& model);

/// Point on the tie-surface continuum of a scalar + rank-one block model with
/// R_1 = R_b > 1, parameterized by the block mass xi in (0, Lambda - mu/R_b).
ModelState tie_continuum(const MultiStrainModel& model, double xi);

/// Dispatch to the constructive case matching the absent set; faces outside
/// those cases come back FaceStatus::Unsupported.
FaceEquilibrium face_equilibrium(const MultiStrainModel& model, const std::vector<int>& absent);

}  // namespace cepp
