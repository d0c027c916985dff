#include <doctest.h>

#include <cmath>

#include "fluidhopf/evolution.hpp"

using namespace fluidhopf;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

GeneratorFamily sinusoidal() {
  const Matrix B = mat2(-1, 1, 1, -1);
  return GeneratorFamily(FourierPolynomialGenerator{B, {FourierTerm{0.5 * B, 1.0, 0.0}}, {}}, 1.5);
}

}  // namespace

TEST_CASE("s = t gives the identity") {
  const EvolutionMatrix U = evolution_matrix(sinusoidal(), 2.0, 2.0, 1e-3);
  CHECK(U.P == Matrix::Identity(2, 2));
}

TEST_CASE("symmetric two-state chain over unit time") {
  const GeneratorFamily family = GeneratorFamily::constant(mat2(-1, 1, 1, -1), 1.0);
  const Matrix P = evolution_matrix(family, 0.3, 1.3, 1e-3).P;
  const double stay = (1.0 + std::exp(-2.0)) / 2.0;
  const double move = (1.0 - std::exp(-2.0)) / 2.0;
  CHECK(P(0, 0) == doctest::Approx(stay).epsilon(1e-12));
  CHECK(P(0, 1) == doctest::Approx(move).epsilon(1e-12));
  CHECK(P(1, 0) == doctest::Approx(move).epsilon(1e-12));
  CHECK(P(1, 1) == doctest::Approx(stay).epsilon(1e-12));
}

TEST_CASE("absorbing chain survival") {
  const GeneratorFamily family = GeneratorFamily::constant(mat2(-1, 1, 0, 0), 1.0);
  for (double ell : {0.5, 1.0, 2.0}) {
    const Matrix P = evolution_matrix(family, 0.0, ell, 1e-3).P;
    CHECK(P(0, 0) == doctest::Approx(std::exp(-ell)).epsilon(1e-12));
    CHECK(P(1, 1) == 1.0);
    CHECK(P(1, 0) == 0.0);
  }
}

TEST_CASE("time-varying rate: closed-form survival") {
  // Lambda_u = (1 + 0.5 sin u) B, so U_{s,t} = exp(H B) with H the integrated weight.
  const GeneratorFamily family = sinusoidal();
  const double s = 0.2, t = 2.7;
  const double H = (t - s) + 0.5 * (std::cos(s) - std::cos(t));
  const Matrix P = evolution_matrix(family, s, t, 1e-3).P;
  CHECK(P(0, 0) == doctest::Approx((1.0 + std::exp(-2.0 * H)) / 2.0).epsilon(1e-11));
  CHECK(P(1, 0) == doctest::Approx((1.0 - std::exp(-2.0 * H)) / 2.0).epsilon(1e-11));
}

TEST_CASE("Chapman-Kolmogorov residuals") {
  const GeneratorFamily constant = GeneratorFamily::constant(mat2(-2, 2, 0.5, -0.5), 2.0);
  CHECK(chapman_kolmogorov_residual(constant, 0.0, 0.37, 1.9, 1e-3) <= 1e-8);
  CHECK(chapman_kolmogorov_residual(sinusoidal(), 1.0, 1.0, 1.0, 1e-3) == 0.0);
  CHECK(chapman_kolmogorov_residual(sinusoidal(), 0.0, 0.5, 1.0, 1e-3) <= 1e-6);
}

TEST_CASE("fourth-order convergence of the flow residual") {
  // Steps that do not divide the sub-intervals, so the split point is not a common node.
  const GeneratorFamily family = sinusoidal();
  const double coarse = chapman_kolmogorov_residual(family, 0.0, 0.5, 1.0, 0.07);
  const double fine = chapman_kolmogorov_residual(family, 0.0, 0.5, 1.0, 0.035);
  REQUIRE(fine > 0.0);
  CHECK(coarse / fine >= 8.0);
}

TEST_CASE("rows stay stochastic") {
  Matrix L(3, 3);
  L << -2, 1, 1, 0.5, -1, 0.5, 1, 2, -3;
  const GeneratorFamily family(FourierPolynomialGenerator{L, {FourierTerm{0.3 * L, 2.0, 0.4}}, {}}, 4.0);
  for (double t : {0.1, 1.0, 5.0}) {
    const Matrix P = evolution_matrix(family, 0.0, t, 1e-2).P;
    CHECK(P.minCoeff() >= 0.0);
    CHECK(P.maxCoeff() <= 1.0);
    for (int i = 0; i < 3; ++i) CHECK(P.row(i).sum() == doctest::Approx(1.0).epsilon(1e-14));
  }
}
