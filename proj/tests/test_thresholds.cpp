#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "cepp/equilibria.hpp"
#include "cepp/linalg.hpp"
#include "cepp/model.hpp"
#include "cepp/thresholds.hpp"

using namespace cepp;

namespace {

const std::string kFixtures = CEPP_FIXTURE_DIR;

double dense_abscissa_oracle(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().real().maxCoeff();
}

MultiStrainModel random_scalar_block(CounterRng& rng) {
  const double raw = rng.uniform(0.2, 0.8);
  Vector w(2), ell(2), vd(2);
  w << raw, 1.0 - raw;
  ell << rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0);
  vd << rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0);
  return MultiStrainModel(rng.uniform(0.5, 2.0), rng.uniform(0.05, 0.25),
                          {ScalarStrain{rng.uniform(0.1, 2.0), rng.uniform(0.3, 2.0),
                                        IncidenceFunction::linear()},
                           RankOneBlockStrain{w, ell, vd}});
}

}  // namespace

TEST_CASE("basic reproduction numbers at the DFE") {
  const auto model = MultiStrainModel::from_file(kFixtures + "/linear_two_strain.json");
  const auto data = reproduction_numbers(model, dfe(model));
  CHECK(data.at_state[0] == doctest::Approx(4.0));
  CHECK(data.at_state[1] == doctest::Approx(2.0));
}

TEST_CASE("invasion number at the strain-1 boundary") {
  const auto model = MultiStrainModel::from_file(kFixtures + "/linear_two_strain.json");
  const auto p1 = scalar_boundary(model, 0);
  const auto data = reproduction_numbers(model, p1);
  CHECK(data.at_state[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("scalar+block invasion ratio identities") {
  CounterRng rng(53);
  int tested = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto model = random_scalar_block(rng);
    const double r1 = model.carrying_level() * model.reproduction_slope(0);
    const double rb = model.carrying_level() * model.reproduction_slope(1);
    const auto e1 = scalar_boundary(model, 0);
    const auto eb = block_boundary(model, 1);
    if (!e1.exists() || !eb.exists()) continue;
    ++tested;
    const double rb_at_e1 = reproduction_numbers(model, e1).at_state[1];
    const double r1_at_eb = reproduction_numbers(model, eb).at_state[0];
    CHECK(std::abs(rb_at_e1 - rb / r1) < 1e-12);
    CHECK(std::abs(r1_at_eb - r1 / rb) < 1e-12);
    CHECK(std::abs(rb_at_e1 * r1_at_eb - 1.0) < 1e-12);
  }
  CHECK(tested > 20);
}

TEST_CASE("transversal Jacobian at the DFE is diagonal in the invasion gaps") {
  const auto model = MultiStrainModel::from_file(kFixtures + "/linear_two_strain.json");
  const auto tj = transversal_jacobian(model, dfe(model));
  REQUIRE(tj.blocks.size() == 2);
  CHECK(tj.abscissae[0] == doctest::Approx(1.0 * (4.0 - 1.0) / 1.0 * 1.0).epsilon(1e-12));  // v1(R1-1) = 3
  CHECK(tj.abscissae[1] == doctest::Approx(1.0 * (2.0 - 1.0)).epsilon(1e-12));              // v2(R2-1) = 1
  CHECK_FALSE(tj.hurwitz());
}

TEST_CASE("transversal abscissa at the boundary equilibrium") {
  const auto model = MultiStrainModel::from_file(kFixtures + "/linear_two_strain.json");
  const auto tj = transversal_jacobian(model, scalar_boundary(model, 0));
  REQUIRE(tj.blocks.size() == 1);
  CHECK(tj.abscissae[0] == doctest::Approx(-0.5).epsilon(1e-12));  // v2(R2^{P1} - 1)
  CHECK(tj.hurwitz());
}

TEST_CASE("transversal abscissa sign equals invasion sign across strain kinds") {
  CounterRng rng(59);
  int tested = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto model = random_scalar_block(rng);
    for (int resident = 0; resident < 2; ++resident) {
      const auto eq = resident == 0 ? scalar_boundary(model, 0) : block_boundary(model, 1);
      if (!eq.exists()) continue;
      const auto data = reproduction_numbers(model, eq);
      const auto tj = transversal_jacobian(model, eq);
      REQUIRE(tj.blocks.size() == 1);
      const int absent = tj.absent[0];
      if (std::abs(data.at_state[absent] - 1.0) < 1e-9) continue;
      ++tested;
      CHECK((tj.abscissae[0] > 0.0) == (data.at_state[absent] > 1.0));
      // eigensolve oracle agrees on the abscissa
      CHECK(std::abs(tj.abscissae[0] - dense_abscissa_oracle(tj.blocks[0].entries())) < 1e-9);
    }
  }
  CHECK(tested > 300);
}

TEST_CASE("invasion numbers agree with face NGM spectral radii") {
  CounterRng rng(61);
  int tested = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto model = random_scalar_block(rng);
    const auto e1 = scalar_boundary(model, 0);
    if (!e1.exists()) continue;
    ++tested;
    const double s = e1.state(0);
    const auto& blk = model.block(1);
    const auto data = ngm(s * blk.w * blk.ell.transpose(), Matrix(blk.vdiag.asDiagonal()));
    CHECK(std::abs(data.rho - reproduction_numbers(model, e1).at_state[1]) < 1e-11);
    CHECK(data.rank_one);
  }
  CHECK(tested > 20);
}

TEST_CASE("sign equivalence self-test on the section-4.4 block") {
  Vector w(2), ell(2);
  w << 0.5, 0.5;
  ell << 0.75, 0.25;
  Matrix VA = Vector({{1.0, 2.0}}).asDiagonal();
  const double slope = ell.dot(VA.inverse() * w);  // 7/16

  SUBCASE("at s0 = 4 the abscissa is positive") {
    Matrix m = 4.0 * w * ell.transpose() - VA;
    CHECK(sign_equivalence_check(MetzlerMatrix(m), 4.0 * slope));
    CHECK(spectral_abscissa(MetzlerMatrix(m)) > 0.0);
  }
  SUBCASE("at its own equilibrium level the block is singular") {
    const double s = 1.0 / slope;
    Matrix m = s * w * ell.transpose() - VA;
    CHECK(sign_equivalence_check(MetzlerMatrix(m), 1.0));
    CHECK(std::abs(spectral_abscissa(MetzlerMatrix(m))) < 1e-10);
  }
}
