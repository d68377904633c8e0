#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cepp/equilibria.hpp"
#include "cepp/model.hpp"

using namespace cepp;

namespace {

const std::string kFixtures = CEPP_FIXTURE_DIR;

MultiStrainModel two_mm_strains(double b1, double b2, double v1, double v2) {
  return MultiStrainModel(1.0, 0.25,
                          {ScalarStrain{b1, v1, IncidenceFunction::michaelis_menten(1.0)},
                           ScalarStrain{b2, v2, IncidenceFunction::michaelis_menten(1.0)}});
}

MultiStrainModel block_only_model() {
  Vector w(2), ell(2), vd(2);
  w << 0.5, 0.5;
  ell << 0.75, 0.25;
  vd << 1.0, 2.0;
  return MultiStrainModel(1.0, 0.25, {RankOneBlockStrain{w, ell, vd}}, {"A"});
}

}  // namespace

TEST_CASE("dfe") {
  const auto model = MultiStrainModel::from_file(kFixtures + "/linear_two_strain.json");
  const auto eq = dfe(model);
  CHECK(eq.exists());
  CHECK(eq.state(0) == 4.0);
  CHECK(eq.residual == 0.0);
  CHECK(eq.absent == std::vector<int>{0, 1});
}

TEST_CASE("linear scalar boundary closed form") {
  const auto model = MultiStrainModel::from_file(kFixtures + "/linear_two_strain.json");
  const auto eq = scalar_boundary(model, 0);
  REQUIRE(eq.exists());
  CHECK(eq.state(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eq.state(1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(eq.state(2) == 0.0);
  CHECK(eq.residual < 1e-12);
}

TEST_CASE("scalar boundary absent below threshold") {
  const auto model = MultiStrainModel(
      1.0, 0.25, {ScalarStrain{0.125, 1.0, IncidenceFunction::linear()}});  // R = 1/2
  const auto eq = scalar_boundary(model, 0);
  CHECK_FALSE(eq.exists());
  REQUIRE(eq.existence_conditions.size() == 1);
  CHECK(eq.existence_conditions[0].value == doctest::Approx(0.5));
}

TEST_CASE("Michaelis-Menten scalar boundary satisfies the equilibrium identities") {
  const auto model = two_mm_strains(1.0, 0.5, 1.0, 1.0);
  const auto eq = scalar_boundary(model, 0);
  REQUIRE(eq.exists());
  const auto& strain = model.scalar(0);
  const double s = eq.state(0), i = eq.state(1);
  CHECK(std::abs(strain.beta * s * strain.incidence.value(i) - strain.v * i) < 1e-10);
  CHECK(std::abs(model.mu() * s + strain.v * i - model.lambda()) < 1e-10);
  CHECK(eq.residual < 1e-10);
  // frozen closed form: (4 - 4i)/(1+i) = 1 => i = 3/5, s = 1.6
  CHECK(i == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(s == doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("coexistence is impossible for two linear strains") {
  const auto model = MultiStrainModel::from_file(kFixtures + "/linear_two_strain.json");
  const auto eq = coexistence(model);
  CHECK_FALSE(eq.exists());
}

TEST_CASE("mixed linear plus Michaelis-Menten coexistence") {
  // linear strain pins s* = v/beta; pick parameters with mutual invasion
  const auto model = MultiStrainModel(
      1.0, 0.25,
      {ScalarStrain{1.0, 1.0, IncidenceFunction::michaelis_menten(1.0)},
       ScalarStrain{0.8, 1.0, IncidenceFunction::linear()}});
  // P1: s1 = 1.6 (from the MM computation), invasion of 2: 0.8*1.6 = 1.28 > 1
  // P2: s2 = 1.25, invasion of 1: 1.25 > 1
  const auto eq = coexistence(model);
  REQUIRE(eq.exists());
  CHECK(eq.state(0) == doctest::Approx(1.25).epsilon(1e-12));  // 1/R_linear
  CHECK(eq.residual < 1e-10);
  CHECK(eq.state(1) > 0.0);
  CHECK(eq.state(2) > 0.0);
}

TEST_CASE("two Michaelis-Menten strains coexist with mutual invasion") {
  const auto model = two_mm_strains(1.0, 1.2, 1.0, 1.5);
  const auto p1 = scalar_boundary(model, 0);
  const auto p2 = scalar_boundary(model, 1);
  REQUIRE(p1.exists());
  REQUIRE(p2.exists());
  const double inv2 = model.reproduction_slope(1) * p1.state(0);
  const double inv1 = model.reproduction_slope(0) * p2.state(0);
  REQUIRE(inv2 > 1.0);
  REQUIRE(inv1 > 1.0);

  const auto eq = coexistence(model);
  REQUIRE(eq.exists());
  // frozen closed forms for alpha = 1: i_j(s) = R_j s - 1, F(s) = 3.5 - 2.45 s
  CHECK(eq.state(0) == doctest::Approx(10.0 / 7.0).epsilon(1e-10));
  CHECK(eq.state(1) == doctest::Approx(3.0 / 7.0).epsilon(1e-9));
  CHECK(eq.state(2) == doctest::Approx(1.0 / 7.0).epsilon(1e-9));
  CHECK(eq.residual < 1e-10);
  // bracket property: s* strictly between the construction endpoints
  CHECK(eq.state(0) > std::max(1.0 / model.reproduction_slope(0), 1.0 / model.reproduction_slope(1)));
  CHECK(eq.state(0) < std::min(p1.state(0), p2.state(0)));
}

TEST_CASE("coexistence rejects multi-segment tabulated incidence") {
  const auto model = MultiStrainModel(
      1.0, 0.25,
      {ScalarStrain{1.0, 1.0, IncidenceFunction::tabulated({{1.0, 1.0}, {2.0, 1.5}, {3.0, 1.75}})},
       ScalarStrain{1.0, 1.0, IncidenceFunction::michaelis_menten(1.0)}});
  CHECK_THROWS_AS(coexistence(model), InvalidArgument);
}

TEST_CASE("block boundary closed form matches the hand evaluation") {
  const auto model = block_only_model();
  const auto eq = block_boundary(model, 0);
  REQUIRE(eq.exists());
  CHECK(eq.state(0) == doctest::Approx(16.0 / 7.0).epsilon(1e-14));
  CHECK(eq.state(1) == doctest::Approx(3.0 / 14.0).epsilon(1e-14));  // xi w1 / v1
  CHECK(eq.state(2) == doctest::Approx(3.0 / 28.0).epsilon(1e-14));  // xi w2 / v2
  CHECK(eq.residual < 1e-12);
}

TEST_CASE("block boundary does not exist at threshold") {
  Vector w(2), ell(2), vd(2);
  w << 0.5, 0.5;
  ell << 1.0, 1.0;
  vd << 4.0, 4.0;  // R_b = 4 * (1/4) = 1 exactly
  const auto model = MultiStrainModel(1.0, 0.25, {RankOneBlockStrain{w, ell, vd}});
  const auto eq = block_boundary(model, 0);
  CHECK_FALSE(eq.exists());
  CHECK(eq.near_nonhyperbolic);
}

TEST_CASE("block boundary residual over random draws") {
  CounterRng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    Vector w(2), ell(2), vd(2);
    const double raw = rng.uniform(0.2, 0.8);
    w << raw, 1.0 - raw;
    ell << rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0);
    vd << rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0);
    const double lambda = rng.uniform(0.5, 2.0);
    const double mu = rng.uniform(0.05, 0.25);
    const auto model = MultiStrainModel(lambda, mu, {RankOneBlockStrain{w, ell, vd}});
    const auto eq = block_boundary(model, 0);
    if (!eq.exists()) continue;
    CHECK(eq.residual < 1e-12);
  }
}

TEST_CASE("tie continuum interpolates the boundary equilibria") {
  // scalar strain tuned to tie: R_1 = R_b = 7/4 => beta = v * R_1 / s0
  Vector w(2), ell(2), vd(2);
  w << 0.5, 0.5;
  ell << 0.75, 0.25;
  vd << 1.0, 2.0;
  const double slope_b = 7.0 / 16.0;
  const auto model = MultiStrainModel(
      1.0, 0.25,
      {ScalarStrain{slope_b, 1.0, IncidenceFunction::linear()}, RankOneBlockStrain{w, ell, vd}});
  const double xi_max = 1.0 - 0.25 * (16.0 / 7.0);  // 3/7

  SUBCASE("interior points have tiny residual") {
    for (double frac : {0.1, 0.5, 0.9}) {
      const ModelState state = tie_continuum(model, frac * xi_max);
      CHECK(vector_field(model, state).lpNorm<Eigen::Infinity>() < 1e-12);
    }
  }
  SUBCASE("xi -> 0 recovers the scalar equilibrium") {
    const ModelState state = tie_continuum(model, 1e-12);
    const auto e1 = scalar_boundary(model, 0);
    CHECK((state - e1.state).lpNorm<Eigen::Infinity>() < 1e-9);
  }
  SUBCASE("xi -> xi_max recovers the block equilibrium") {
    const ModelState state = tie_continuum(model, xi_max - 1e-12);
    const auto eb = block_boundary(model, 1);
    CHECK((state - eb.state).lpNorm<Eigen::Infinity>() < 1e-9);
  }
  SUBCASE("xi outside the open interval is rejected") {
    CHECK_THROWS_AS(tie_continuum(model, 0.0), DomainError);
    CHECK_THROWS_AS(tie_continuum(model, xi_max), DomainError);
  }
}

TEST_CASE("existence thresholds over random draws") {
  CounterRng rng(47);
  int tested = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double b1 = rng.uniform(0.05, 1.5), b2 = rng.uniform(0.05, 1.5);
    const double v1 = rng.uniform(0.3, 1.5), v2 = rng.uniform(0.3, 1.5);
    const auto model = two_mm_strains(b1, b2, v1, v2);
    const double r1 = 4.0 * b1 / v1, r2 = 4.0 * b2 / v2;
    if (std::abs(r1 - 1.0) < 1e-3 || std::abs(r2 - 1.0) < 1e-3) continue;
    ++tested;
    const auto p1 = scalar_boundary(model, 0);
    const auto p2 = scalar_boundary(model, 1);
    CHECK(p1.exists() == (r1 > 1.0));
    CHECK(p2.exists() == (r2 > 1.0));
    // invasion numbers stay below basic numbers whenever the resident exists
    if (p1.exists()) CHECK(model.reproduction_slope(1) * p1.state(0) < r2);
    if (p2.exists()) CHECK(model.reproduction_slope(0) * p2.state(0) < r1);
  }
  CHECK(tested > 150);
}

TEST_CASE("bisection roots are unique on a sign-monotone grid") {
  const auto model = two_mm_strains(1.0, 0.5, 1.0, 1.0);
  const auto& strain = model.scalar(0);
  auto phi = [&](double i) {
    return strain.beta * ((model.lambda() - strain.v * i) / model.mu()) *
               strain.incidence.slope_ratio(i) -
           strain.v;
  };
  int sign_changes = 0;
  double prev = phi(0.0);
  for (int k = 1; k <= 1000; ++k) {
    const double cur = phi(k * (model.lambda() / strain.v) / 1000.0);
    CHECK(cur <= prev + 1e-12);  // monotone decreasing
    if ((prev > 0.0) != (cur > 0.0)) ++sign_changes;
    prev = cur;
  }
  CHECK(sign_changes == 1);
}

TEST_CASE("face dispatcher covers the lattice shapes") {
  const auto model = MultiStrainModel::from_file(kFixtures + "/scalar_block.json");
  CHECK(face_equilibrium(model, {0, 1}).exists());     // DFE
  CHECK(face_equilibrium(model, {1}).exists());        // scalar alone
  CHECK(face_equilibrium(model, {0}).exists());        // block alone
  const auto interior = face_equilibrium(model, {});   // off the tie surface
  CHECK(interior.status == FaceStatus::NotExisting);
}
