#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cepp/common.hpp"
#include "cepp/equilibria.hpp"
#include "cepp/lyapunov.hpp"
#include "cepp/model.hpp"

namespace cepp {

/// Invasion numbers within this band of each other branch the walk instead of
/// silently picking a dominant invader.
inline constexpr double kWalkTieTolerance = 1e-9;
/// Relative margin under which a sweep cell is labeled "threshold" rather
/// than assigned an attractor.
inline constexpr double kSweepThresholdMargin = 1e-6;

struct LatticeNode {
  std::vector<int> absent;
  FaceEquilibrium equilibrium;
  /// (absent strain, invasion number R_strain(s_E)); empty unless the face
  /// equilibrium exists.
  std::vector<std::pair<int, double>> invasion;
};

struct Lattice {
  int strain_count;
  std::vector<LatticeNode> nodes;  ///< indexed by absent-set bitmask

  const LatticeNode& by_absent_mask(unsigned mask) const { return nodes.at(mask); }
};

/// Every subset of strains as an absent set, each with its face equilibrium
/// (when constructible) and the invasion numbers of its absent strains.
Lattice build_lattice(const MultiStrainModel& model);

enum class Certificate { GlobalProved, LocalOnly, Obstructed };

std::string to_string(Certificate c);

struct WalkStep {
  std::vector<int> absent;        ///< node before the step
  int removed_invader = -1;       ///< strain made present, -1 at the terminal node
  double invasion_number = 0.0;
  double s_level = 0.0;           ///< susceptible level at the node
};

struct CepReport {
  std::vector<WalkStep> trace;    ///< ends with the terminal node (removed = -1)
  LatticeNode terminal;
  std::string attractor_label;
  std::vector<InequalityRecord> region_inequalities;
  Certificate certificate = Certificate::LocalOnly;
  bool near_threshold = false;
  int alignment_rank = 1;
  std::uint64_t seed = 0;
  std::vector<CepReport> branches;  ///< nonempty only on dominance ties
};

/// Label of a lattice node: "DFE" or "E_" + joined present-strain names.
std::string node_label(const MultiStrainModel& model, const std::vector<int>& absent);

/// Start at the DFE node; while some absent strain has invasion number > 1,
/// remove the dominant invader and recompute the face equilibrium. Ties
/// branch and report all branches.
CepReport cep_walk(const MultiStrainModel& model);

struct ClassifyOptions {
  std::uint64_t seed = 1;
  std::size_t verify_samples = 20000;  ///< scan size backing the Obstructed verdict
  bool run_verification = true;        ///< cheap walks can skip the scan
};

/// cep_walk plus the region inequality list, the certificate level, and the
/// alignment diagnostic at the terminal node.
CepReport classify_region(const MultiStrainModel& model, const ClassifyOptions& options = {});

struct ParamRange {
  std::string name;  ///< lambda | mu | beta<j> | v<j> | alpha<j>
  double lo;
  double hi;
  int steps;
};

struct SweepRow {
  std::vector<double> values;
  std::string region_label;   ///< attractor label or "threshold"
  std::string attractor;
  double margin;              ///< relative distance to the nearest threshold
  Certificate certificate;
  int walk_length;
  bool s_strictly_decreasing;
  bool terminal_ok;           ///< all terminal invasion numbers <= 1 + tol
};

/// Deterministic grid sweep over 1-2 named parameters; rows ordered by grid
/// index, points processed in parallel.
std::vector<SweepRow> partition_sweep(const MultiStrainModel& base,
                                      const std::vector<ParamRange>& vary, int threads = 0);

/// Rebuild the model with one named parameter replaced.
MultiStrainModel with_parameter(const MultiStrainModel& base, const std::string& name, double value);

}  // namespace cepp
