#include "cepp/stoichiometry.hpp"

#include <algorithm>
#include <functional>

namespace cepp {

namespace {

bool is_siphon(const StoichiometricNetwork& net, const std::vector<bool>& members) {
  for (const auto& r : net.reactions) {
    bool produces_member = false;
    for (const auto& [sp, coeff] : r.stoich)
      if (coeff > 0 && members[sp]) {
        produces_member = true;
        break;
      }
    if (!produces_member) continue;
    if (!StoichiometricNetwork::rate_vanishes(r, members)) return false;
  }
  return true;
}

}  // namespace

std::vector<SiphonSet> minimal_siphons(const StoichiometricNetwork& net) {
  const int n = static_cast<int>(net.species.size());
  if (n > 24)
    throw InvalidArgument("siphon enumeration capped at 24 species; restructure the network");

  // Any species produced by a never-vanishing reaction (constant inflow) can
  // belong to no siphon; drop such species from the candidate pool.
  std::vector<bool> excluded(n, false);
  for (const auto& r : net.reactions) {
    if (!r.factors.empty()) continue;
    for (const auto& [sp, coeff] : r.stoich)
      if (coeff > 0) excluded[sp] = true;
  }
  std::vector<int> pool;
  for (int sp = 0; sp < n; ++sp)
    if (!excluded[sp]) pool.push_back(sp);

  std::vector<SiphonSet> found;
  std::vector<std::vector<bool>> found_masks;
  std::vector<int> combo;

  auto is_superset_of_found = [&](const std::vector<bool>& members) {
    for (const auto& mask : found_masks) {
      bool superset = true;
      for (int sp = 0; sp < n; ++sp)
        if (mask[sp] && !members[sp]) {
          superset = false;
          break;
        }
      if (superset) return true;
    }
    return false;
  };

  // increasing size guarantees minimality of each accepted set
  for (std::size_t size = 1; size <= pool.size(); ++size) {
    std::function<void(std::size_t)> extend = [&](std::size_t start) {
      if (combo.size() == size) {
        std::vector<bool> members(n, false);
        for (int sp : combo) members[sp] = true;
        if (is_superset_of_found(members)) return;
        if (is_siphon(net, members)) {
          found.push_back(SiphonSet{combo, true});
          found_masks.push_back(members);
        }
        return;
      }
      for (std::size_t k = start; k < pool.size(); ++k) {
        combo.push_back(pool[k]);
        extend(k + 1);
        combo.pop_back();
      }
    };
    extend(0);
  }
  return found;
}

}  // namespace cepp
