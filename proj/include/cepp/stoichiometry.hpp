#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "cepp/common.hpp"
#include "cepp/model.hpp"

namespace cepp {

/// One reaction column of the stoichiometric matrix. The rate is a product
/// of factors; each factor vanishes exactly when every species in its set is
/// zero (a single-species factor for mass-action-style terms, the whole block
/// for linear forms l^T z). `support` is the union of factor species: the
/// variables the rate depends on.
struct Reaction {
  std::string name;
  std::vector<std::pair<int, int>> stoich;     ///< (species, net integer coefficient)
  std::vector<int> support;
  std::vector<std::vector<int>> factors;

  bool produces(int species) const;
  bool consumes(int species) const;
};

struct StoichiometricNetwork {
  std::vector<std::string> species;
  std::vector<Reaction> reactions;

  Eigen::MatrixXi gamma() const;
  /// Def: a negative stoichiometric coefficient forces membership in the
  /// rate's support.
  bool chemical_condition_holds() const;
  /// True when the reaction rate is identically zero on {x_i = 0 : i in zero_set}.
  static bool rate_vanishes(const Reaction& r, const std::vector<bool>& zero_set);
};

/// Reactions: inflow, susceptible death, per-strain infection (consuming s,
/// catalyzed by the infected species), per-compartment removals.
StoichiometricNetwork to_stoichiometric(const MultiStrainModel& model);

struct SiphonSet {
  std::vector<int> species;
  bool minimal = true;
};

/// All minimal siphons: species sets where every producing reaction's rate
/// dies on the set. Exhaustive enumeration by increasing size with superset
/// pruning; species count capped at 24.
std::vector<SiphonSet> minimal_siphons(const StoichiometricNetwork& net);

}  // namespace cepp
