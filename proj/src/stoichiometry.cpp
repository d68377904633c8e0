#include "cepp/stoichiometry.hpp"

#include <algorithm>

namespace cepp {

bool Reaction::produces(int species) const {
  for (const auto& [sp, coeff] : stoich)
    if (sp == species && coeff > 0) return true;
  return false;
}

bool Reaction::consumes(int species) const {
  for (const auto& [sp, coeff] : stoich)
    if (sp == species && coeff < 0) return true;
  return false;
}

Eigen::MatrixXi StoichiometricNetwork::gamma() const {
  Eigen::MatrixXi g = Eigen::MatrixXi::Zero(species.size(), reactions.size());
  for (std::size_t r = 0; r < reactions.size(); ++r)
    for (const auto& [sp, coeff] : reactions[r].stoich) g(sp, r) += coeff;
  return g;
}

bool StoichiometricNetwork::chemical_condition_holds() const {
  for (const auto& r : reactions)
    for (const auto& [sp, coeff] : r.stoich) {
      if (coeff >= 0) continue;
      if (std::find(r.support.begin(), r.support.end(), sp) == r.support.end()) return false;
    }
  return true;
}

bool StoichiometricNetwork::rate_vanishes(const Reaction& r, const std::vector<bool>& zero_set) {
  for (const auto& factor : r.factors) {
    bool all_zero = !factor.empty();
    for (int sp : factor)
      if (!zero_set[sp]) {
        all_zero = false;
        break;
      }
    if (all_zero) return true;
  }
  return false;
}

StoichiometricNetwork to_stoichiometric(const MultiStrainModel& model) {
  StoichiometricNetwork net;
  net.species.push_back("s");
  std::vector<std::vector<int>> strain_species(model.strain_count());
  for (int j = 0; j < model.strain_count(); ++j) {
    if (model.is_scalar(j)) {
      strain_species[j].push_back(static_cast<int>(net.species.size()));
      net.species.push_back("i_" + model.strain_name(j));
    } else {
      const int n = model.strain_dim(j);
      for (int k = 0; k < n; ++k) {
        strain_species[j].push_back(static_cast<int>(net.species.size()));
        net.species.push_back("z_" + model.strain_name(j) + std::to_string(k + 1));
      }
    }
  }
  const int s = 0;

  Reaction inflow;
  inflow.name = "inflow";
  inflow.stoich = {{s, +1}};
  net.reactions.push_back(inflow);

  Reaction death;
  death.name = "s_removal";
  death.stoich = {{s, -1}};
  death.support = {s};
  death.factors = {{s}};
  net.reactions.push_back(death);

  for (int j = 0; j < model.strain_count(); ++j) {
    const auto& members = strain_species[j];
    if (model.is_scalar(j)) {
      const int i = members[0];
      Reaction infect;
      infect.name = "infection_" + model.strain_name(j);
      infect.stoich = {{s, -1}, {i, +1}};
      infect.support = {s, i};
      infect.factors = {{s}, {i}};  // rate beta * s * f(i)
      net.reactions.push_back(infect);

      Reaction removal;
      removal.name = "removal_" + model.strain_name(j);
      removal.stoich = {{i, -1}};
      removal.support = {i};
      removal.factors = {{i}};
      net.reactions.push_back(removal);
    } else {
      // one infection reaction per produced compartment; each is driven by the
      // full linear force l^T z, so the block is one vanishing factor
      for (std::size_t k = 0; k < members.size(); ++k) {
        Reaction infect;
        infect.name = "infection_" + model.strain_name(j) + std::to_string(k + 1);
        infect.stoich = {{s, -1}, {members[k], +1}};
        infect.support = {s};
        infect.support.insert(infect.support.end(), members.begin(), members.end());
        infect.factors = {{s}, members};
        net.reactions.push_back(infect);
      }
      for (std::size_t k = 0; k < members.size(); ++k) {
        Reaction removal;
        removal.name = "removal_" + model.strain_name(j) + std::to_string(k + 1);
        removal.stoich = {{members[k], -1}};
        removal.support = {members[k]};
        removal.factors = {{members[k]}};
        net.reactions.push_back(removal);
      }
    }
  }
  return net;
}

}  // namespace cepp
