#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cepp/common.hpp"
#include "cepp/equilibria.hpp"
#include "cepp/model.hpp"

namespace cepp {

/// Volterra entropy G(u) = u - 1 - ln u, nonnegative, zero only at u = 1.
double bregman(double u);

/// B(x, y) = G(1/x) + G(x F(y)/y) - G(F(y)) + G(y) for a normalized incidence
/// F (increasing, concave, F(0) = 0, F(1) = 1). Nonnegative, zero iff x = 1
/// and F(y) = y.
double entropy_bracket(double x, double y, const std::function<double(double)>& F);

/// F(z) = f(i_ref z) / f(i_ref), the normalization that preserves
/// monotonicity and concavity.
std::function<double(double)> normalized_incidence(const IncidenceFunction& f, double i_ref);

/// Weighted contribution l * zref * G(z/zref); nonnegative, zero iff z = zref.
struct EntropyTerm {
  int state_index;
  double reference;
  double weight;
};

/// Weighted contribution l * z.
struct LinearTerm {
  int state_index;
  double weight;
};

/// Perron-Volterra candidate at a face equilibrium: Volterra entropy on the
/// susceptible level and the present strains, left-Perron-weighted linear
/// terms on the absent strains. delta > 0 adds cross-equilibrium entropy
/// terms on absent blocks, referenced at those blocks' own boundary
/// equilibria.
struct LyapunovCandidate {
  FaceEquilibrium equilibrium;
  std::vector<EntropyTerm> entropy_terms;
  std::vector<LinearTerm> linear_terms;
  double delta = 0.0;
  bool flagged_near_nonhyperbolic = false;

  double value(const ModelState& state) const;
  /// Smallest positive floor for each entropy-carrying component when a
  /// sampler must keep G evaluable.
  double entropy_floor(int state_index) const;
};

LyapunovCandidate build_candidate(const MultiStrainModel& model, const FaceEquilibrium& eq,
                                  double delta = 0.0);

/// Reported term decomposition for two-block candidates. t1..t3 sum to the
/// directional derivative of the standard candidate along the model flow;
/// t4 = s phi_B (sum_j alpha_j / y_j - 1) is the sign-indefinite cross-block
/// functional tracked as the obstruction indicator.
struct VdotTerms {
  bool valid = false;
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
};

/// Exact directional derivative sum_i dV/dz_i * f_i(state), via the closed
/// forms l (1 - ref/z) f_i for entropy terms and l f_i for linear terms.
/// Entropy-carrying components must be strictly positive.
double vdot(const LyapunovCandidate& candidate, const MultiStrainModel& model,
            const ModelState& state);

VdotTerms vdot_terms(const LyapunovCandidate& candidate, const MultiStrainModel& model,
                     const ModelState& state);

struct ScanRegion {
  bool use_invariant_region = true;      ///< uniform over Gamma when true
  std::vector<std::pair<double, double>> box;  ///< per-component bounds otherwise
};

struct ScanOptions {
  ScanRegion region;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  double boundary_bias_fraction = 0.25;  ///< samples with components scaled by 1e-3
  double violation_tolerance = 1e-12;
  int threads = 0;                       ///< 0: worker_count()
};

struct SampleRecord {
  std::uint64_t index;
  ModelState state;
  double value;
  double vdot;
  VdotTerms terms;
};

struct VdotReport {
  std::size_t sample_count = 0;
  double max_vdot = 0.0;
  ModelState argmax;
  std::size_t violation_count = 0;
  VdotTerms terms_at_argmax;
  std::uint64_t seed = 0;
  double violation_tolerance = 0.0;
  double clamp_note = 0.0;  ///< entropy components were clamped to >= this fraction of reference
};

/// Seeded sampling scan of the exact derivative; deterministic given the
/// seed, with the merge order fixed by sample index. An optional sink
/// receives every sample row (for CSV export).
VdotReport verify_nonpositivity(const LyapunovCandidate& candidate, const MultiStrainModel& model,
                                const ScanOptions& options,
                                const std::function<void(const SampleRecord&)>& sink = {});

struct ReducedTestRow {
  double y1;
  double ztilde;
  double vdot_value;
  VdotTerms terms;
};

/// Full derivative restricted to the slice {s = s_A, second resident
/// component at its reference, z_1 = z_2 = ztilde} of a two-block model.
std::vector<ReducedTestRow> reduced_test(const MultiStrainModel& model,
                                         const LyapunovCandidate& candidate,
                                         const std::vector<double>& y1_grid,
                                         const std::vector<double>& ztilde_grid);

struct AlignmentReport {
  int numerical_rank;
  bool aligned;  ///< rank <= 1
  int sample_count;
};

/// Perron-alignment diagnostic: for every rank-one block, the splitting-level
/// left Perron row applied to the block's transversal response at sampled
/// resident susceptible levels. A single block stays in one direction (rank
/// 1); blocks with different removal structure rotate (rank >= 2), flagging
/// the cross-block term the standard ansatz cannot absorb. Scalar strains
/// are aligned automatically and contribute no rows.
AlignmentReport perron_alignment(const MultiStrainModel& model, const FaceEquilibrium& eq,
                                 int y_samples = 32, std::uint64_t seed = 1);

struct LocalCertificate {
  bool found = false;
  double lambda = 0.0;
  std::size_t violations_at_best = 0;
  std::vector<std::pair<double, std::size_t>> grid_report;  ///< (lambda, violations)
};

/// Search for a strict local Lyapunov function lambda * H + Perron-linear on
/// a ball around the equilibrium; requires the transversal Jacobian to be
/// Hurwitz. Returns the first lambda on the geometric grid with zero
/// violations.
LocalCertificate local_certificate(const MultiStrainModel& model, const FaceEquilibrium& eq,
                                   const std::vector<double>& lambda_grid, double ball_radius,
                                   std::size_t samples, std::uint64_t seed = 1);

}  // namespace cepp
