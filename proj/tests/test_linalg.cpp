#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "cepp/linalg.hpp"

using namespace cepp;

namespace {

// Independent oracle: dense eigensolve, no shared code with the power
// iteration path.
double dense_abscissa_oracle(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().real().maxCoeff();
}

Matrix random_metzler(CounterRng& rng, int dim, double sparsity = 0.4) {
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      if (i == j) {
        m(i, j) = rng.uniform(-2.0, 1.0);
      } else {
        m(i, j) = (rng.uniform() < sparsity) ? 0.0 : rng.uniform(0.0, 1.0);
      }
    }
  return m;
}

Matrix random_irreducible_metzler(CounterRng& rng, int dim) {
  Matrix m = random_metzler(rng, dim, 0.3);
  for (int i = 0; i < dim; ++i) {
    const int j = (i + 1) % dim;
    if (m(j, i) == 0.0) m(j, i) = 0.1 + rng.uniform();
  }
  return m;
}

}  // namespace

TEST_CASE("construction rejects negative off-diagonals") {
  Matrix bad(2, 2);
  bad << -1.0, 0.5, -0.2, -1.0;
  CHECK_THROWS_AS(MetzlerMatrix{bad}, InvalidArgument);
}

TEST_CASE("frobenius normal form on a triangular matrix") {
  Matrix m(2, 2);
  m << -1.0, 0.0, 1.0, -2.0;
  const auto form = frobenius_normal_form(MetzlerMatrix(m));
  REQUIRE(form.blocks.size() == 2);
  CHECK(form.blocks[0].size() == 1);
  CHECK(form.blocks[1].size() == 1);
  CHECK(form.abscissa() == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("frobenius normal form of a scalar") {
  Matrix m(1, 1);
  m << -3.0;
  const auto form = frobenius_normal_form(MetzlerMatrix(m));
  REQUIRE(form.blocks.size() == 1);
  CHECK(form.abscissa() == doctest::Approx(-3.0));
}

TEST_CASE("irreducible 2x2 abscissa -1 + sqrt(6)") {
  Matrix m(2, 2);
  m << -1.0, 2.0, 3.0, -1.0;
  const auto form = frobenius_normal_form(MetzlerMatrix(m));
  REQUIRE(form.blocks.size() == 1);
  const double expected = -1.0 + std::sqrt(6.0);
  CHECK(spectral_abscissa(MetzlerMatrix(m)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(dense_abscissa_oracle(m) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("diagonal abscissa") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = -1.0;
  m(1, 1) = -2.0;
  CHECK(spectral_abscissa(MetzlerMatrix(m)) == doctest::Approx(-1.0));
}

TEST_CASE("rank-one perturbation has positive abscissa when s l^T V^{-1} w > 1") {
  const double s = 4.0;
  Vector w(2), ell(2);
  w << 0.5, 0.5;
  ell << 0.75, 0.25;
  Matrix V = Vector({{1.0, 2.0}}).asDiagonal();
  Matrix m = s * w * ell.transpose() - V;
  const double calR = ell.dot(V.inverse() * w);
  REQUIRE(s * calR == doctest::Approx(1.75));  // R_A = 7/4 > 1
  const double abscissa = spectral_abscissa(MetzlerMatrix(m));
  CHECK(abscissa > 0.0);
  CHECK(abscissa == doctest::Approx(dense_abscissa_oracle(m)).epsilon(1e-10));
}

TEST_CASE("shift equivariance") {
  CounterRng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + static_cast<int>(rng.uniform_index(7));
    Matrix m = random_metzler(rng, dim);
    const double c = rng.uniform(-3.0, 3.0);
    Matrix shifted = m;
    shifted.diagonal().array() += c;
    const double a0 = spectral_abscissa(MetzlerMatrix(m));
    const double a1 = spectral_abscissa(MetzlerMatrix(shifted));
    CHECK(std::abs(a1 - (a0 + c)) < 1e-12);
  }
}

TEST_CASE("left splitting-level vector identity for rank-one blocks") {
  // c^T (s w l^T - V) = (R(s) - 1) c^T V with c^T = l^T V^{-1} / (l^T V^{-1} w)
  const double s = 1.7;
  Vector w(3), ell(3);
  w << 0.2, 0.5, 0.3;
  ell << 0.75, 0.25, 1.1;
  Matrix V = Vector({{1.0, 2.0, 0.7}}).asDiagonal();
  const double calR = ell.dot(V.inverse() * w);
  Vector c = (V.inverse().transpose() * ell) / calR;
  Matrix m = s * w * ell.transpose() - V;
  Vector lhs = m.transpose() * c;
  Vector rhs = (s * calR - 1.0) * V.transpose() * c;
  CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("right Perron vector of a diagonal matrix is the dominant unit vector") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = -1.0;
  m(1, 1) = -2.0;
  const auto res = perron_vectors(MetzlerMatrix(m), Side::Right);
  CHECK(res.vector(0) == doctest::Approx(1.0));
  CHECK(res.vector(1) == doctest::Approx(0.0));
  CHECK(res.abscissa == doctest::Approx(-1.0));
  CHECK_FALSE(res.degenerate_tie);
}

TEST_CASE("tied blocks are surfaced, not silently broken") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = -1.0;
  m(1, 1) = -1.0;
  const auto res = perron_vectors(MetzlerMatrix(m), Side::Left);
  CHECK(res.degenerate_tie);
  REQUIRE(res.tied_alternates.size() == 1);
}

TEST_CASE("Perron residuals on random irreducible matrices") {
  CounterRng rng(202);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 2 + static_cast<int>(rng.uniform_index(7));
    Matrix m = random_irreducible_metzler(rng, dim);
    const auto left = perron_vectors(MetzlerMatrix(m), Side::Left);
    const auto right = perron_vectors(MetzlerMatrix(m), Side::Right);
    const Vector lres = m.transpose() * left.vector - left.abscissa * left.vector;
    const Vector rres = m * right.vector - right.abscissa * right.vector;
    CHECK(lres.lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK(rres.lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK((left.vector.array() > 0.0).all());
    CHECK(left.vector.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("normal form invariants on random Metzler matrices") {
  CounterRng rng(303);
  for (int trial = 0; trial < 500; ++trial) {
    const int dim = 2 + static_cast<int>(rng.uniform_index(7));
    Matrix m = random_metzler(rng, dim, 0.6);
    MetzlerMatrix metzler(m);
    const auto form = frobenius_normal_form(metzler);

    // blocks partition the index set
    std::vector<bool> seen(dim, false);
    for (const auto& blk : form.blocks)
      for (int idx : blk) {
        CHECK_FALSE(seen[idx]);
        seen[idx] = true;
      }
    for (bool s : seen) CHECK(s);

    // permuted matrix is exactly block lower triangular
    const Matrix p = form.permuted(metzler.entries());
    int row0 = 0;
    for (const auto& blk : form.blocks) {
      const int bs = static_cast<int>(blk.size());
      for (int r = row0; r < row0 + bs; ++r)
        for (int c = row0 + bs; c < dim; ++c) CHECK(p(r, c) == 0.0);
      row0 += bs;
    }

    // spectral abscissa equals max block abscissa, against the dense oracle
    CHECK(std::abs(form.abscissa() - dense_abscissa_oracle(metzler.entries())) < 1e-9);
  }
}

TEST_CASE("ngm of a diagonal splitting") {
  const double s0 = 4.0;
  Matrix F = Matrix::Zero(2, 2);
  F(0, 0) = 1.0 * s0;
  F(1, 1) = 0.5 * s0;
  Matrix V = Matrix::Identity(2, 2);
  const auto data = ngm(F, V);
  CHECK(data.K(0, 0) == doctest::Approx(4.0));
  CHECK(data.K(1, 1) == doctest::Approx(2.0));
  CHECK(data.rho == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(data.numerical_rank == 2);
}

TEST_CASE("ngm of a rank-one splitting") {
  const double s0 = 4.0;
  Vector w(2), ell(2);
  w << 0.5, 0.5;
  ell << 0.75, 0.25;
  Matrix V = Vector({{1.0, 2.0}}).asDiagonal();
  const auto data = ngm(s0 * w * ell.transpose(), V);
  CHECK(data.rank_one);
  CHECK(data.rho == doctest::Approx(s0 * ell.dot(V.inverse() * w)).epsilon(1e-12));
}

TEST_CASE("section-4.4 spectral radii") {
  const double s0 = 4.0;
  Vector w(2), ell(2);
  w << 0.5, 0.5;
  ell << 0.75, 0.25;
  Matrix VA = Vector({{1.0, 2.0}}).asDiagonal();
  Matrix VB = Vector({{1.5, 2.5}}).asDiagonal();
  const auto ka = ngm(s0 * w * ell.transpose(), VA);
  const auto kb = ngm(s0 * w * ell.transpose(), VB);
  CHECK(std::abs(ka.rho - 1.75) < 1e-10);
  CHECK(std::abs(kb.rho - 1.2) < 1e-10);
  CHECK(ka.rho > kb.rho);
  CHECK(kb.rho > 1.0);
}

TEST_CASE("rank-one ngm identity rho = v^T u") {
  CounterRng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 2 + static_cast<int>(rng.uniform_index(4));
    Vector u(dim), v(dim);
    for (int i = 0; i < dim; ++i) {
      u(i) = rng.uniform(0.1, 2.0);
      v(i) = rng.uniform(0.1, 2.0);
    }
    const auto data = ngm(u * v.transpose(), Matrix::Identity(dim, dim));
    CHECK(data.rank_one);
    CHECK(std::abs(data.rho - v.dot(u)) < 1e-12);
  }
}

TEST_CASE("ngm rejects bad splittings") {
  Matrix F = Matrix::Identity(2, 2);
  Matrix singular = Matrix::Zero(2, 2);
  CHECK_THROWS_AS(ngm(F, singular), InvalidArgument);
  Matrix V(2, 2);
  V << 1.0, 0.9, 0.9, 1.0;  // inverse has negative entries
  CHECK_THROWS_AS(ngm(F, V), InvalidArgument);
}

TEST_CASE("rational string parsing") {
  CHECK(parse_number_string("3/4") == doctest::Approx(0.75));
  CHECK(parse_number_string("0.25") == doctest::Approx(0.25));
  CHECK(parse_number_string("-1/8") == doctest::Approx(-0.125));
  CHECK_THROWS_AS(parse_number_string("1/0"), InvalidArgument);
  CHECK_THROWS_AS(parse_number_string("abc"), InvalidArgument);
}
