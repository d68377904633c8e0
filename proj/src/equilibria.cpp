#include "cepp/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace cepp {

namespace {

constexpr double kBisectValueTol = 1e-12;
constexpr double kBisectWidthTol = 1e-13;
constexpr int kBisectCap = 200;

// Certified bisection for a decreasing function with f(lo) > 0 > f(hi).
double bisect_decreasing(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  double fhi = f(hi);
  if (!(flo > 0.0) || !(fhi < 0.0)) {
    std::ostringstream os;
    os << "bisection bracket failure: f(" << lo << ") = " << flo << ", f(" << hi << ") = " << fhi;
    throw ConvergenceError(os.str());
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < kBisectCap; ++it) {
    mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) < kBisectValueTol || hi - lo < kBisectWidthTol * (1.0 + std::abs(mid))) return mid;
    if (fm > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return mid;
}

// Unique i(s) > 0 with g(i) = 1/(slope * s), defined for s > 1/slope when g
// is strictly decreasing. Returns false when g plateaus above the target.
bool inner_infection_level(const IncidenceFunction& inc, double slope, double s, double* out) {
  const double target = 1.0 / (slope * s);
  if (target >= 1.0) {
    *out = 0.0;
    return target == 1.0;
  }
  double hi = 1.0;
  int doublings = 0;
  while (inc.slope_ratio(hi) >= target) {
    hi *= 2.0;
    if (++doublings > 200) return false;
  }
  double lo = 0.0;
  for (int it = 0; it < kBisectCap; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (inc.slope_ratio(mid) >= target)
      lo = mid;
    else
      hi = mid;
  }
  *out = 0.5 * (lo + hi);
  return true;
}

void finalize(const MultiStrainModel& model, FaceEquilibrium* eq) {
  if (eq->status != FaceStatus::Exists) {
    eq->state = Vector::Zero(model.state_dim());
    return;
  }
  eq->residual = vector_field(model, eq->state).lpNorm<Eigen::Infinity>();
  for (const auto& rec : eq->existence_conditions)
    if (rec.margin() < kThresholdBand) eq->near_nonhyperbolic = true;
}

std::vector<int> absent_except(const MultiStrainModel& model, std::initializer_list<int> present) {
  std::vector<int> absent;
  for (int j = 0; j < model.strain_count(); ++j)
    if (std::find(present.begin(), present.end(), j) == present.end()) absent.push_back(j);
  return absent;
}

}  // namespace

std::vector<int> FaceEquilibrium::present(int strain_count) const {
  std::vector<int> out;
  for (int j = 0; j < strain_count; ++j)
    if (!is_absent(j)) out.push_back(j);
  return out;
}

bool FaceEquilibrium::is_absent(int j) const {
  return std::find(absent.begin(), absent.end(), j) != absent.end();
}

FaceEquilibrium dfe(const MultiStrainModel& model) {
  FaceEquilibrium eq;
  eq.absent = absent_except(model, {});
  eq.state = Vector::Zero(model.state_dim());
  eq.state(0) = model.carrying_level();
  eq.status = FaceStatus::Exists;
  finalize(model, &eq);
  return eq;
}

FaceEquilibrium scalar_boundary(const MultiStrainModel& model, int j) {
  const auto& strain = model.scalar(j);
  const double s0 = model.carrying_level();
  const double R = strain.beta * s0 / strain.v;

  FaceEquilibrium eq;
  eq.absent = absent_except(model, {j});
  eq.existence_conditions.push_back({"R_" + model.strain_name(j), R, 1.0, '>'});
  if (R <= 1.0) {
    eq.status = FaceStatus::NotExisting;
    eq.near_nonhyperbolic = std::abs(R - 1.0) < kThresholdBand;
    finalize(model, &eq);
    return eq;
  }

  double s_eq, i_eq;
  if (strain.incidence.kind() == IncidenceKind::Linear) {
    s_eq = strain.v / strain.beta;
    i_eq = (model.lambda() - model.mu() * s_eq) / strain.v;
  } else {
    const double lam = model.lambda();
    const double mu = model.mu();
    auto phi = [&](double i) {
      return strain.beta * ((lam - strain.v * i) / mu) * strain.incidence.slope_ratio(i) - strain.v;
    };
    i_eq = bisect_decreasing(phi, 0.0, lam / strain.v);
    s_eq = (lam - strain.v * i_eq) / mu;
  }

  eq.state = Vector::Zero(model.state_dim());
  eq.state(0) = s_eq;
  eq.state(model.strain_offset(j)) = i_eq;
  eq.status = FaceStatus::Exists;
  finalize(model, &eq);
  return eq;
}

FaceEquilibrium block_boundary(const MultiStrainModel& model, int j) {
  const auto& blk = model.block(j);
  const double slope = model.reproduction_slope(j);
  const double R = model.carrying_level() * slope;

  FaceEquilibrium eq;
  eq.absent = absent_except(model, {j});
  eq.existence_conditions.push_back({"R_" + model.strain_name(j), R, 1.0, '>'});
  if (R <= 1.0) {
    eq.status = FaceStatus::NotExisting;
    eq.near_nonhyperbolic = std::abs(R - 1.0) < kThresholdBand;
    finalize(model, &eq);
    return eq;
  }

  const double s_eq = 1.0 / slope;
  const double xi = model.lambda() - model.mu() * s_eq;
  eq.state = Vector::Zero(model.state_dim());
  eq.state(0) = s_eq;
  const int off = model.strain_offset(j);
  for (int k = 0; k < model.strain_dim(j); ++k)
    eq.state(off + k) = xi * blk.w(k) / blk.vdiag(k);
  eq.status = FaceStatus::Exists;
  finalize(model, &eq);
  return eq;
}

FaceEquilibrium coexistence(const MultiStrainModel& model, int j, int k) {
  const auto& sj = model.scalar(j);
  const auto& sk = model.scalar(k);
  using GClass = IncidenceFunction::GClass;
  const GClass gj = sj.incidence.g_class();
  const GClass gk = sk.incidence.g_class();
  if (gj == GClass::Mixed || gk == GClass::Mixed)
    throw InvalidArgument(
        "coexistence requires each slope ratio to be strictly decreasing or identically 1; "
        "tabulated incidence with several segments is neither");

  FaceEquilibrium eq;
  eq.absent = absent_except(model, {j, k});

  const FaceEquilibrium pj = scalar_boundary(model, j);
  const FaceEquilibrium pk = scalar_boundary(model, k);
  const double slope_j = model.reproduction_slope(j);
  const double slope_k = model.reproduction_slope(k);

  const std::string nj = model.strain_name(j), nk = model.strain_name(k);
  const double inv_k_at_pj = pj.exists() ? slope_k * pj.state(0) : 0.0;
  const double inv_j_at_pk = pk.exists() ? slope_j * pk.state(0) : 0.0;
  eq.existence_conditions.push_back(
      {"R_" + nk + "(P_" + nj + ")", inv_k_at_pj, 1.0, '>'});
  eq.existence_conditions.push_back(
      {"R_" + nj + "(P_" + nk + ")", inv_j_at_pk, 1.0, '>'});

  const bool mutual = pj.exists() && pk.exists() && inv_k_at_pj > 1.0 && inv_j_at_pk > 1.0;
  if (gj == GClass::Identity && gk == GClass::Identity && mutual)
    throw Error(
        "contradictory input: two linear strains report mutual invasion, which the threshold "
        "algebra excludes");
  if (!mutual || (gj == GClass::Identity && gk == GClass::Identity)) {
    eq.status = FaceStatus::NotExisting;
    for (const auto& rec : eq.existence_conditions)
      if (rec.margin() < kThresholdBand) eq.near_nonhyperbolic = true;
    finalize(model, &eq);
    return eq;
  }

  const double lam = model.lambda();
  const double mu = model.mu();
  double s_star, i_j, i_k;
  if (gj == GClass::StrictlyDecreasing && gk == GClass::StrictlyDecreasing) {
    const double lo = std::max(1.0 / slope_j, 1.0 / slope_k);
    const double hi = std::min(pj.state(0), pk.state(0));
    auto infected = [&](const ScalarStrain& strain, double slope, double s) {
      double i = 0.0;
      if (!inner_infection_level(strain.incidence, slope, s, &i))
        throw DomainError("slope ratio plateaus before reaching the coexistence target");
      return i;
    };
    auto balance = [&](double s) {
      return lam - mu * s - sj.v * infected(sj, slope_j, s) - sk.v * infected(sk, slope_k, s);
    };
    s_star = bisect_decreasing(balance, lo * (1.0 + 1e-14), hi * (1.0 - 1e-14));
    i_j = infected(sj, slope_j, s_star);
    i_k = infected(sk, slope_k, s_star);
  } else {
    // mixed case: the linear strain pins s*, the nonlinear strain solves at
    // that level, and the balance closes the linear strain
    const bool j_linear = (gj == GClass::Identity);
    const ScalarStrain& lin = j_linear ? sj : sk;
    const ScalarStrain& nonlin = j_linear ? sk : sj;
    const double slope_lin = j_linear ? slope_j : slope_k;
    const double slope_non = j_linear ? slope_k : slope_j;
    s_star = 1.0 / slope_lin;
    double i_non = 0.0;
    if (!inner_infection_level(nonlin.incidence, slope_non, s_star, &i_non))
      throw DomainError("slope ratio plateaus before reaching the coexistence target");
    const double i_lin = (lam - mu * s_star - nonlin.v * i_non) / lin.v;
    if (!(i_lin > 0.0))
      throw Error("internal inconsistency: mutual invasion held but the linear strain closed at " +
                  std::to_string(i_lin));
    i_j = j_linear ? i_lin : i_non;
    i_k = j_linear ? i_non : i_lin;
  }

  eq.state = Vector::Zero(model.state_dim());
  eq.state(0) = s_star;
  eq.state(model.strain_offset(j)) = i_j;
  eq.state(model.strain_offset(k)) = i_k;
  eq.status = FaceStatus::Exists;
  finalize(model, &eq);
  return eq;
}

FaceEquilibrium coexistence(const MultiStrainModel& model) {
  if (model.strain_count() != 2 || !model.is_scalar(0) || !model.is_scalar(1))
    throw InvalidArgument("coexistence() expects a model with exactly two scalar strains");
  return coexistence(model, 0, 1);
}

ModelState tie_continuum(const MultiStrainModel& model, double xi) {
  int scalar_idx = -1, block_idx = -1;
  for (int j = 0; j < model.strain_count(); ++j) {
    if (model.is_scalar(j) && scalar_idx < 0)
      scalar_idx = j;
    else if (model.is_block(j) && block_idx < 0)
      block_idx = j;
  }
  if (scalar_idx < 0 || block_idx < 0 || model.strain_count() != 2)
    throw InvalidArgument("tie continuum requires one scalar strain and one rank-one block");
  if (model.scalar(scalar_idx).incidence.kind() != IncidenceKind::Linear)
    throw InvalidArgument("tie continuum requires linear incidence on the scalar strain");

  const double s0 = model.carrying_level();
  const double r_scalar = s0 * model.reproduction_slope(scalar_idx);
  const double r_block = s0 * model.reproduction_slope(block_idx);
  if (std::abs(r_scalar - r_block) > kThresholdBand * (1.0 + std::abs(r_block)))
    throw DomainError("not on the tie surface: reproduction numbers differ");
  if (!(r_block > 1.0)) throw DomainError("tie continuum requires the common reproduction number > 1");

  const double slope_b = model.reproduction_slope(block_idx);
  const double xi_max = model.lambda() - model.mu() / slope_b;
  if (!(xi > 0.0) || !(xi < xi_max)) {
    std::ostringstream os;
    os << "xi = " << xi << " outside the open interval (0, " << xi_max << ")";
    throw DomainError(os.str());
  }

  ModelState state = Vector::Zero(model.state_dim());
  state(0) = 1.0 / slope_b;
  state(model.strain_offset(scalar_idx)) = (xi_max - xi) / model.scalar(scalar_idx).v;
  const auto& blk = model.block(block_idx);
  const int off = model.strain_offset(block_idx);
  for (int k = 0; k < model.strain_dim(block_idx); ++k)
    state(off + k) = xi * blk.w(k) / blk.vdiag(k);
  return state;
}

FaceEquilibrium face_equilibrium(const MultiStrainModel& model, const std::vector<int>& absent) {
  std::vector<int> present;
  for (int j = 0; j < model.strain_count(); ++j)
    if (std::find(absent.begin(), absent.end(), j) == absent.end()) present.push_back(j);

  auto with_absent = [&](FaceEquilibrium eq) {
    eq.absent = absent;
    return eq;
  };

  if (present.empty()) return with_absent(dfe(model));
  if (present.size() == 1) {
    const int j = present.front();
    return with_absent(model.is_scalar(j) ? scalar_boundary(model, j) : block_boundary(model, j));
  }
  if (present.size() == 2) {
    const int j = present[0], k = present[1];
    if (model.is_scalar(j) && model.is_scalar(k)) return with_absent(coexistence(model, j, k));
    FaceEquilibrium eq;
    eq.absent = absent;
    eq.state = Vector::Zero(model.state_dim());
    if (model.is_block(j) != model.is_block(k)) {
      // a linear scalar pins s and can meet a block only on the tie surface,
      // as a continuum; the nonlinear case is outside the constructive scope
      const int sc = model.is_scalar(j) ? j : k;
      const int bl = model.is_block(j) ? j : k;
      if (model.scalar(sc).incidence.kind() != IncidenceKind::Linear) {
        eq.status = FaceStatus::Unsupported;
        return eq;
      }
      const double rs = model.carrying_level() * model.reproduction_slope(sc);
      const double rb = model.carrying_level() * model.reproduction_slope(bl);
      eq.existence_conditions.push_back({"R_" + model.strain_name(sc) + " - R_" + model.strain_name(bl),
                                         rs - rb, 0.0, '>'});
      const bool tie = std::abs(rs - rb) < kThresholdBand * (1.0 + std::abs(rb));
      eq.status = tie && rb > 1.0 ? FaceStatus::Degenerate : FaceStatus::NotExisting;
      eq.near_nonhyperbolic = tie;
      return eq;
    }
    // two blocks: same tie-surface situation
    const double ra = model.carrying_level() * model.reproduction_slope(j);
    const double rbb = model.carrying_level() * model.reproduction_slope(k);
    const bool tie = std::abs(ra - rbb) < kThresholdBand * (1.0 + std::abs(rbb));
    eq.status = tie && ra > 1.0 ? FaceStatus::Degenerate : FaceStatus::NotExisting;
    eq.near_nonhyperbolic = tie;
    return eq;
  }

  FaceEquilibrium eq;
  eq.absent = absent;
  eq.state = Vector::Zero(model.state_dim());
  eq.status = FaceStatus::Unsupported;
  return eq;
}

}  // namespace cepp
