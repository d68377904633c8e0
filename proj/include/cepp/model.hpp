#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cepp/common.hpp"
#include "cepp/incidence.hpp"

namespace cepp {

struct ScalarStrain {
  double beta;
  double v;
  IncidenceFunction incidence;
};

/// Irreducible rank-one infection block z' = (s w l^T - V) z with w > 0
/// summing to 1, l > 0, V diagonal positive.
struct RankOneBlockStrain {
  Vector w;
  Vector ell;
  Vector vdiag;
};

using StrainSpec = std::variant<ScalarStrain, RankOneBlockStrain>;

/// One susceptible compartment plus n strain blocks. State layout: s first,
/// then strain blocks in declaration order. Immutable after construction.
class MultiStrainModel {
 public:
  MultiStrainModel(double lambda, double mu, std::vector<StrainSpec> strains,
                   std::vector<std::string> strain_names = {});

  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  int strain_count() const { return static_cast<int>(strains_.size()); }
  const StrainSpec& strain(int j) const { return strains_.at(j); }
  const std::string& strain_name(int j) const { return names_.at(j); }
  bool is_scalar(int j) const;
  bool is_block(int j) const;
  const ScalarStrain& scalar(int j) const;
  const RankOneBlockStrain& block(int j) const;

  int state_dim() const { return state_dim_; }
  int strain_offset(int j) const { return offsets_.at(j); }
  int strain_dim(int j) const;
  double removal_rate_min(int j) const;

  /// Lambda/mu, the total-mass bound of the invariant region.
  double carrying_level() const { return lambda_ / mu_; }
  /// mu <= every removal rate; when violated the explicit invariant-region
  /// bound is downgraded to a warning, not an error.
  bool a2_holds() const;

  /// Slope of the reproduction function: beta/v for scalar strains,
  /// l^T V^{-1} w for blocks. R_j(s) = s * reproduction_slope(j).
  double reproduction_slope(int j) const;

  static MultiStrainModel from_json(const nlohmann::json& j);
  static MultiStrainModel from_file(const std::string& path);
  nlohmann::json to_json() const;

 private:
  double lambda_;
  double mu_;
  std::vector<StrainSpec> strains_;
  std::vector<std::string> names_;
  std::vector<int> offsets_;
  int state_dim_;
};

/// Time derivative of the state under the model flow.
Vector vector_field(const MultiStrainModel& model, const ModelState& state);

/// Jacobian of the vector field (dense, state_dim x state_dim).
Matrix model_jacobian(const MultiStrainModel& model, const ModelState& state);

struct AssumptionCheck {
  std::string name;
  int strain = -1;  // -1: model-level
  bool passed;
  std::string witness;
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  bool all_passed() const;
  std::vector<std::string> failures() const;
};

/// Checks (A1) f(0)=0, f'(0)=1; (A2) mu <= min removal; (A3) f <= id;
/// (A4) increasing/concave; and monotonicity of g, on a log-spaced grid of
/// 200 points in (0, 10 Lambda/mu]. Report-only, never throws.
ValidationReport validate_assumptions(const MultiStrainModel& model);

/// The compact set {state >= 0 : s + total infected <= Lambda/mu}; forward
/// invariant when (A2) holds.
struct InvariantRegion {
  double bound;
  bool guaranteed;  ///< false when (A2) fails
  int dim;

  bool contains(const ModelState& state, double tol = 1e-9) const;
  /// Uniform sample from the solid simplex, by index so parallel scans are
  /// reproducible.
  ModelState sample_at(const CounterRng& rng, std::uint64_t index) const;
};

InvariantRegion invariant_region(const MultiStrainModel& model);

}  // namespace cepp
