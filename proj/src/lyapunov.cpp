#include "cepp/lyapunov.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "cepp/linalg.hpp"
#include "cepp/thresholds.hpp"

namespace cepp {

double bregman(double u) {
  if (!(u > 0.0)) throw DomainError("G(u) requires u > 0");
  return u - 1.0 - std::log(u);
}

double entropy_bracket(double x, double y, const std::function<double(double)>& F) {
  if (!(x > 0.0) || !(y > 0.0)) throw DomainError("entropy bracket requires x, y > 0");
  const double fy = F(y);
  return bregman(1.0 / x) + bregman(x * fy / y) - bregman(fy) + bregman(y);
}

std::function<double(double)> normalized_incidence(const IncidenceFunction& f, double i_ref) {
  if (!(i_ref > 0.0)) throw DomainError("normalization reference must be positive");
  const double scale = f.value(i_ref);
  return [f, i_ref, scale](double z) { return f.value(i_ref * z) / scale; };
}

double LyapunovCandidate::value(const ModelState& state) const {
  double v = 0.0;
  for (const auto& term : entropy_terms) {
    const double z = state(term.state_index);
    if (!(z > 0.0)) return std::numeric_limits<double>::infinity();
    v += term.weight * term.reference * bregman(z / term.reference);
  }
  for (const auto& term : linear_terms) v += term.weight * state(term.state_index);
  return v;
}

double LyapunovCandidate::entropy_floor(int state_index) const {
  for (const auto& term : entropy_terms)
    if (term.state_index == state_index) return 1e-6 * term.reference;
  return 0.0;
}

LyapunovCandidate build_candidate(const MultiStrainModel& model, const FaceEquilibrium& eq,
                                  double delta) {
  if (!eq.exists()) throw DomainError("candidate construction needs an existing face equilibrium");
  if (delta < 0.0) throw InvalidArgument("delta must be >= 0");

  LyapunovCandidate cand;
  cand.equilibrium = eq;
  cand.delta = delta;
  cand.flagged_near_nonhyperbolic = eq.near_nonhyperbolic;

  const double s_eq = eq.state(0);
  cand.entropy_terms.push_back({0, s_eq, 1.0});

  bool block_resident = false;
  for (int j = 0; j < model.strain_count(); ++j)
    if (!eq.is_absent(j) && model.is_block(j)) block_resident = true;

  for (int j = 0; j < model.strain_count(); ++j) {
    const int off = model.strain_offset(j);
    if (!eq.is_absent(j)) {
      if (model.is_scalar(j)) {
        cand.entropy_terms.push_back({off, eq.state(off), 1.0});
      } else {
        const auto& blk = model.block(j);
        const double slope = model.reproduction_slope(j);
        for (int k = 0; k < model.strain_dim(j); ++k)
          cand.entropy_terms.push_back({off + k, eq.state(off + k), blk.ell(k) / (slope * blk.vdiag(k))});
      }
    } else {
      if (model.is_scalar(j)) {
        const double weight = block_resident ? model.scalar(j).beta * s_eq / model.scalar(j).v : 1.0;
        cand.linear_terms.push_back({off, weight});
      } else {
        const auto& blk = model.block(j);
        const double slope = model.reproduction_slope(j);
        for (int k = 0; k < model.strain_dim(j); ++k)
          cand.linear_terms.push_back({off + k, blk.ell(k) / (blk.vdiag(k) * slope)});
        if (delta > 0.0) {
          const FaceEquilibrium other = block_boundary(model, j);
          if (!other.exists())
            throw DomainError("delta augmentation needs the invading block's boundary equilibrium, "
                              "which does not exist (its reproduction number is <= 1)");
          for (int k = 0; k < model.strain_dim(j); ++k) {
            const double weight = delta * blk.ell(k) * blk.w(k) / (blk.vdiag(k) * slope);
            cand.entropy_terms.push_back({off + k, other.state(off + k), weight});
          }
        }
      }
    }
  }
  return cand;
}

double vdot(const LyapunovCandidate& candidate, const MultiStrainModel& model,
            const ModelState& state) {
  const Vector f = vector_field(model, state);
  double out = 0.0;
  for (const auto& term : candidate.entropy_terms) {
    const double z = state(term.state_index);
    if (!(z > 0.0)) throw DomainError("derivative undefined: entropy component at zero");
    out += term.weight * (1.0 - term.reference / z) * f(term.state_index);
  }
  for (const auto& term : candidate.linear_terms) out += term.weight * f(term.state_index);
  return out;
}

namespace {

struct TwoBlockShape {
  int resident;
  int invader;
};

std::optional<TwoBlockShape> two_block_shape(const LyapunovCandidate& candidate,
                                             const MultiStrainModel& model) {
  if (model.strain_count() != 2 || !model.is_block(0) || !model.is_block(1)) return std::nullopt;
  const auto present = candidate.equilibrium.present(2);
  if (present.size() != 1) return std::nullopt;
  return TwoBlockShape{present.front(), present.front() == 0 ? 1 : 0};
}

}  // namespace

VdotTerms vdot_terms(const LyapunovCandidate& candidate, const MultiStrainModel& model,
                     const ModelState& state) {
  VdotTerms terms;
  const auto shape = two_block_shape(candidate, model);
  if (!shape) return terms;
  const auto& eq = candidate.equilibrium;
  const auto& res = model.block(shape->resident);
  const auto& inv = model.block(shape->invader);
  const int res_off = model.strain_offset(shape->resident);
  const int inv_off = model.strain_offset(shape->invader);
  const int nr = model.strain_dim(shape->resident);
  const int ni = model.strain_dim(shape->invader);

  const double s_eq = eq.state(0);
  const double mu = model.mu();
  const double xi = model.lambda() - mu * s_eq;
  const double slope_res = model.reproduction_slope(shape->resident);
  const double slope_inv = model.reproduction_slope(shape->invader);
  const double s = state(0);
  const double u = s / s_eq;
  if (!(u > 0.0)) throw DomainError("derivative undefined: susceptible level at zero");

  double ybar = 0.0;
  Vector alpha(nr), y(nr);
  for (int k = 0; k < nr; ++k) {
    alpha(k) = res.ell(k) * res.w(k) / (res.vdiag(k) * slope_res);
    y(k) = state(res_off + k) / eq.state(res_off + k);
    if (!(y(k) > 0.0)) throw DomainError("derivative undefined: resident component at zero");
    ybar += alpha(k) * y(k);
  }

  const auto z = state.segment(inv_off, ni);
  const double phi_inv = inv.ell.dot(z);

  terms.valid = true;
  terms.t1 = -mu * s_eq * (u - 1.0) * (u - 1.0) / u;
  double bracket = (1.0 - 1.0 / u) * (1.0 - u * ybar);
  for (int k = 0; k < nr; ++k) bracket += alpha(k) * (1.0 - 1.0 / y(k)) * (u * ybar - y(k));
  terms.t2 = xi * bracket;

  // c_B^T V_B z from the candidate's own invader weights
  double cvz = 0.0;
  for (const auto& lin : candidate.linear_terms) {
    const int k = lin.state_index - inv_off;
    if (k >= 0 && k < ni) cvz += lin.weight * inv.vdiag(k) * state(lin.state_index);
  }
  terms.t3 = (s_eq * slope_inv - 1.0) * cvz;

  double recip = 0.0;
  for (int k = 0; k < nr; ++k) recip += alpha(k) / y(k);
  terms.t4 = s * phi_inv * (recip - 1.0);
  return terms;
}

namespace {

ModelState draw_sample(const MultiStrainModel& model, const LyapunovCandidate& candidate,
                       const ScanOptions& options, const InvariantRegion& gamma,
                       std::uint64_t index) {
  const int dim = model.state_dim();
  const CounterRng rng(options.seed, 0x5ca1ab1e);
  ModelState state(dim);
  if (options.region.use_invariant_region) {
    state = gamma.sample_at(rng, index);
  } else {
    const std::uint64_t base = index * static_cast<std::uint64_t>(dim + 2);
    for (int k = 0; k < dim; ++k) {
      const auto& [lo, hi] = options.region.box.at(k);
      state(k) = lo + (hi - lo) * rng.uniform_at(base + k);
    }
  }
  // boundary-biased samples push a random component subset toward the face
  const CounterRng bias_rng(options.seed, 0xb1a5ed);
  const std::uint64_t mask_bits = bias_rng.bits_at(index);
  const double bias_draw = bias_rng.uniform_at(index * 2 + 1);
  if (bias_draw < options.boundary_bias_fraction) {
    bool any = false;
    for (int k = 0; k < dim; ++k)
      if ((mask_bits >> k) & 1) {
        state(k) *= 1e-3;
        any = true;
      }
    if (!any) state(index % dim) *= 1e-3;
  }
  // G diverges at zero, so entropy-carrying components are floored
  for (const auto& term : candidate.entropy_terms)
    state(term.state_index) = std::max(state(term.state_index), 1e-6 * term.reference);
  return state;
}

}  // namespace

VdotReport verify_nonpositivity(const LyapunovCandidate& candidate, const MultiStrainModel& model,
                                const ScanOptions& options,
                                const std::function<void(const SampleRecord&)>& sink) {
  if (!options.region.use_invariant_region &&
      options.region.box.size() != static_cast<std::size_t>(model.state_dim()))
    throw InvalidArgument("scan box dimension mismatch");

  const InvariantRegion gamma = invariant_region(model);
  VdotReport report;
  report.sample_count = options.samples;
  report.seed = options.seed;
  report.violation_tolerance = options.violation_tolerance;
  report.clamp_note = 1e-6;
  report.max_vdot = -std::numeric_limits<double>::infinity();

  struct Partial {
    std::size_t violations = 0;
    double max_vdot = -std::numeric_limits<double>::infinity();
    std::uint64_t argmax_index = 0;
    ModelState argmax;
  };

  auto scan_range = [&](std::uint64_t begin, std::uint64_t end, Partial* partial) {
    for (std::uint64_t k = begin; k < end; ++k) {
      const ModelState state = draw_sample(model, candidate, options, gamma, k);
      const double vd = vdot(candidate, model, state);
      if (vd > options.violation_tolerance) ++partial->violations;
      if (vd > partial->max_vdot) {
        partial->max_vdot = vd;
        partial->argmax_index = k;
        partial->argmax = state;
      }
      if (sink) {
        SampleRecord rec{k, state, candidate.value(state), vd, vdot_terms(candidate, model, state)};
        sink(rec);
      }
    }
  };

  const int threads = sink ? 1 : (options.threads > 0 ? options.threads : worker_count());
  std::vector<Partial> partials(threads);
  if (threads == 1) {
    scan_range(0, options.samples, &partials[0]);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (options.samples + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::uint64_t begin = t * chunk;
      const std::uint64_t end = std::min<std::uint64_t>(options.samples, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end, t] { scan_range(begin, end, &partials[t]); });
    }
    for (auto& th : pool) th.join();
  }

  std::uint64_t best_index = 0;
  for (const auto& partial : partials) {
    report.violation_count += partial.violations;
    if (partial.argmax.size() == 0) continue;
    // deterministic merge: larger value wins, ties broken by sample index
    if (partial.max_vdot > report.max_vdot ||
        (partial.max_vdot == report.max_vdot && partial.argmax_index < best_index)) {
      report.max_vdot = partial.max_vdot;
      report.argmax = partial.argmax;
      best_index = partial.argmax_index;
    }
  }
  if (report.argmax.size() > 0) report.terms_at_argmax = vdot_terms(candidate, model, report.argmax);
  return report;
}

std::vector<ReducedTestRow> reduced_test(const MultiStrainModel& model,
                                         const LyapunovCandidate& candidate,
                                         const std::vector<double>& y1_grid,
                                         const std::vector<double>& ztilde_grid) {
  const auto shape = two_block_shape(candidate, model);
  if (!shape) throw DomainError("reduced test applies to two-block models at a block-resident face");
  const auto& eq = candidate.equilibrium;
  const int res_off = model.strain_offset(shape->resident);
  const int inv_off = model.strain_offset(shape->invader);
  const int nr = model.strain_dim(shape->resident);
  const int ni = model.strain_dim(shape->invader);

  std::vector<ReducedTestRow> rows;
  rows.reserve(y1_grid.size() * ztilde_grid.size());
  for (double y1 : y1_grid) {
    if (!(y1 > 0.0)) throw DomainError("reduced slice requires y1 > 0");
    for (double zt : ztilde_grid) {
      ModelState state = eq.state;
      state(res_off) = y1 * eq.state(res_off);
      for (int k = 1; k < nr; ++k) state(res_off + k) = eq.state(res_off + k);
      for (int k = 0; k < ni; ++k) state(inv_off + k) = zt;
      // the augmented candidate carries entropy on the invader block
      for (const auto& term : candidate.entropy_terms)
        state(term.state_index) = std::max(state(term.state_index), 1e-12 * term.reference);
      rows.push_back({y1, zt, vdot(candidate, model, state), vdot_terms(candidate, model, state)});
    }
  }
  return rows;
}

AlignmentReport perron_alignment(const MultiStrainModel& model, const FaceEquilibrium& eq,
                                 int y_samples, std::uint64_t seed) {
  if (!eq.exists()) throw DomainError("alignment diagnostic needs an existing face equilibrium");
  std::vector<int> blocks;
  int infected_dim = 0;
  std::vector<int> col_offset(model.strain_count(), 0);
  for (int j = 0; j < model.strain_count(); ++j) {
    col_offset[j] = infected_dim;
    infected_dim += model.strain_dim(j);
    if (model.is_block(j)) blocks.push_back(j);
  }
  if (blocks.empty()) return AlignmentReport{1, true, 0};

  CounterRng rng(seed, 0xa11e);
  const double s0 = model.carrying_level();
  Matrix rows(y_samples, infected_dim);
  for (int r = 0; r < y_samples; ++r) {
    const double s = rng.uniform(0.05 * s0, s0);
    rows.row(r).setZero();
    for (int j : blocks) {
      const auto& blk = model.block(j);
      const double slope = model.reproduction_slope(j);
      const int n = model.strain_dim(j);
      // splitting-level left Perron row applied to the transversal response
      Vector c = blk.ell.cwiseQuotient(blk.vdiag) / slope;
      Vector row = (s * blk.w * blk.ell.transpose() - Matrix(blk.vdiag.asDiagonal())).transpose() * c;
      rows.row(r).segment(col_offset[j], n) = row.transpose();
    }
  }
  const int rank = numerical_rank(rows, 1e-9);
  return AlignmentReport{std::max(rank, 1), rank <= 1, y_samples};
}

LocalCertificate local_certificate(const MultiStrainModel& model, const FaceEquilibrium& eq,
                                   const std::vector<double>& lambda_grid, double ball_radius,
                                   std::size_t samples, std::uint64_t seed) {
  const TransversalJacobian transversal = transversal_jacobian(model, eq);
  if (!transversal.hurwitz())
    throw DomainError("invader not excluded; local certificate inapplicable");

  // resident entropy from the standard construction; invader weights from the
  // frozen transversal left Perron vectors
  LyapunovCandidate base = build_candidate(model, eq, 0.0);
  base.linear_terms.clear();
  for (std::size_t b = 0; b < transversal.absent.size(); ++b) {
    const int j = transversal.absent[b];
    const int off = model.strain_offset(j);
    if (model.is_scalar(j)) {
      base.linear_terms.push_back({off, 1.0});
    } else {
      const auto perron = perron_vectors(transversal.blocks[b], Side::Left);
      for (int k = 0; k < model.strain_dim(j); ++k)
        base.linear_terms.push_back({off + k, perron.vector(k)});
    }
  }

  LocalCertificate cert;
  CounterRng rng(seed, 0x10ca1);
  const int dim = model.state_dim();

  for (double lambda : lambda_grid) {
    LyapunovCandidate scaled = base;
    for (auto& term : scaled.entropy_terms) term.weight *= lambda;
    std::size_t violations = 0;
    CounterRng draw = rng.split(static_cast<std::uint64_t>(lambda * 1e18));
    std::size_t evaluated = 0;
    std::size_t attempts = 0;
    while (evaluated < samples && attempts++ < 64 * samples) {
      // direction via normalized gaussians, radius biased toward the shell
      Vector dir(dim);
      for (int k = 0; k < dim; ++k) {
        const double u1 = draw.uniform(), u2 = draw.uniform();
        dir(k) = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
      }
      dir.normalize();
      const double radius = ball_radius * std::pow(draw.uniform(), 1.0 / dim);
      if (radius < 0.05 * ball_radius) continue;
      ModelState state = eq.state + radius * dir;
      bool usable = true;
      for (int k = 0; k < dim; ++k)
        if (state(k) < 0.0) state(k) = 0.0;
      for (const auto& term : scaled.entropy_terms) {
        state(term.state_index) = std::max(state(term.state_index), 1e-3 * term.reference);
        if (!(state(term.state_index) > 0.0)) usable = false;
      }
      if (!usable) continue;
      if ((state - eq.state).norm() < 0.05 * ball_radius) continue;
      ++evaluated;
      if (vdot(scaled, model, state) >= 0.0) ++violations;
    }
    cert.grid_report.emplace_back(lambda, violations);
    if (violations == 0 && !cert.found) {
      cert.found = true;
      cert.lambda = lambda;
      cert.violations_at_best = 0;
    }
  }
  return cert;
}

}  // namespace cepp
