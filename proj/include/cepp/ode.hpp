#pragma once

#include <optional>
#include <vector>

#include "cepp/common.hpp"
#include "cepp/equilibria.hpp"
#include "cepp/lyapunov.hpp"
#include "cepp/model.hpp"

namespace cepp {

struct IntegrateOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int output_points = 500;
  /// Candidate whose value is tracked along the orbit (optional).
  const LyapunovCandidate* candidate = nullptr;
};

struct OrbitResult {
  std::vector<double> times;
  std::vector<ModelState> states;
  std::vector<double> lyapunov_values;  ///< empty without a candidate
  bool converged = false;
  ModelState limit_candidate;
  double distance_to_target = 0.0;
  /// max over steps of V(t_{k+1}) - V(t_k); <= tolerance means the candidate
  /// decreased monotonically along the orbit.
  double lyapunov_max_step_increase = 0.0;
};

/// Adaptive Dormand-Prince 4(5) integration over [0, T] with dense sampling
/// at >= output_points uniform times. States are clipped at -1e-12; deeper
/// negativity or step-size collapse raises an error.
OrbitResult integrate(const MultiStrainModel& model, const ModelState& initial, double T,
                      const IntegrateOptions& options = {});

struct ConvergenceVerdict {
  bool converged;
  double distance;
  bool lyapunov_monotone;
  double max_step_increase;
};

struct AttractorCheckOptions {
  double radius = 1e-6;
  /// Horizon; <= 0 picks 50/|abscissa of the linearization at the target|
  /// when that abscissa is negative, else 1e4.
  double horizon = 0.0;
  double step_tolerance = 1e-8;
  const LyapunovCandidate* candidate = nullptr;
  double rel_tol = 1e-9;
};

/// Integrates each initial condition and reports whether the orbit ends
/// within `radius` of the predicted equilibrium, plus Lyapunov monotonicity
/// along the way when a candidate is attached.
std::vector<ConvergenceVerdict> attractor_check(const MultiStrainModel& model,
                                                const FaceEquilibrium& predicted,
                                                const std::vector<ModelState>& initials,
                                                const AttractorCheckOptions& options = {});

}  // namespace cepp
