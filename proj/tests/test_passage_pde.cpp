#include <doctest.h>

#include <cmath>

#include "fluidhopf/passage_pde.hpp"
#include "fluidhopf/rng.hpp"

using namespace fluidhopf;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

FluidModel symmetric() {
  return FluidModel{StateSpace({"+", "-"}, {1.0, -1.0}), GeneratorFamily::constant(mat2(-1, 1, 1, -1), 1.0)};
}

FluidModel sinusoidal() {
  const Matrix B = mat2(-1, 1, 1, -1);
  return FluidModel{StateSpace({"+", "-"}, {1.0, -1.0}),
                    GeneratorFamily(FourierPolynomialGenerator{B, {FourierTerm{0.5 * B, 1.0, 0.0}}, {}}, 1.5)};
}

FluidModel three_state(double sign) {
  Matrix L(3, 3);
  L << -2, 1, 1, 0.5, -1, 0.5, 1, 2, -3;
  return FluidModel{StateSpace({"a", "b", "c"}, {sign * 1.0, sign * 2.0, sign * -1.5}),
                    GeneratorFamily(FourierPolynomialGenerator{L, {FourierTerm{0.2 * L, 1.0, 0.0}}, {}}, 3.6)};
}

GridParams grid(double step) {
  GridParams p;
  p.ds = step;
  p.da = step;
  return p;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::ConfigError;
}

const double kRoot3 = std::sqrt(3.0);

}  // namespace

TEST_CASE("smoothly truncated exponential boundary data") {
  const BoundaryFunction g = BoundaryFunction::exp_indicator(1.0, 0, 20.0);
  CHECK(g(0.0, 0) == 1.0);
  CHECK(g(0.0, 1) == 0.0);
  CHECK(g(18.5, 0) == doctest::Approx(std::exp(-18.5)).epsilon(1e-14));
  CHECK(g(20.0, 0) == 0.0);
  CHECK(g(25.0, 0) == 0.0);
  CHECK(g.smooth());
  // C^1 across the start and end of the cutoff
  for (double s : {19.0, 19.999999}) {
    const double h = 1e-7;
    CHECK(g.derivative(s, 0) == doctest::Approx((g(s + h, 0) - g(s - h, 0)) / (2 * h)).epsilon(1e-4));
  }
  CHECK(smooth_cutoff(19.0, 20.0) == 1.0);
  CHECK(smooth_cutoff(20.0, 20.0) == 0.0);
  CHECK(smooth_cutoff_derivative(19.5, 20.0) < 0.0);
}

TEST_CASE("table boundary data interpolates linearly") {
  StateTable t;
  t.ds = 0.5;
  t.states = {0};
  t.values = Matrix(3, 1);
  t.values << 1.0, 0.5, 0.25;
  const BoundaryFunction g = BoundaryFunction::table(t, 1.5);
  CHECK(g(0.25, 0) == doctest::Approx(0.75));
  CHECK(g(0.75, 0) == doctest::Approx(0.375));
  CHECK(g(0.2, 1) == 0.0);
  CHECK(g(1.6, 0) == 0.0);
  CHECK_FALSE(g.smooth());
  CHECK(code_of([&] { g.derivative(0.1, 0); }) == ErrorCode::DerivativeUnavailable);
}

TEST_CASE("boundary row reproduces g exactly") {
  const FluidModel model = sinusoidal();
  const BoundaryFunction g = BoundaryFunction::exp_indicator(1.0, 0, 20.0);
  const GridFunction F = solve_passage(model, g, 1.0, grid(4e-3));
  for (Eigen::Index k = 0; k < F.level_row.rows(); ++k) {
    const double s = F.grid.s(static_cast<int>(k));
    REQUIRE(F.level_row(k, 0) == g(s, 0));
  }
}

TEST_CASE("constant generator: P and J against the matrix factorization") {
  const FluidModel model = symmetric();
  const GridParams params = grid(2e-3);
  const double tol = 5.0 * (params.ds + params.da);
  const BoundaryFunction g = BoundaryFunction::exp_indicator(1.0, 0, 20.0);
  const GridFunction F = solve_passage(model, g, 1.0, params);
  const StateTable P = extract_P(F);
  const StateTable J = extract_J(solve_passage(model, g, 0.0, params));
  for (int k = 0; k < P.size() && P.s(k) <= 5.0; k += 50) {
    const double s = P.s(k);
    CHECK(std::abs(P.values(k, P.column_of(0)) - std::exp(-s) * std::exp(-kRoot3)) <= tol);
    CHECK(std::abs(J.values(k, J.column_of(1)) - std::exp(-s) * (2.0 - kRoot3)) <= tol);
  }
  CHECK(std::abs(J.values(0, 0) - (2.0 - kRoot3)) <= 2e-3);
}

TEST_CASE("generator of the passage semigroup, constant case") {
  const FluidModel model = symmetric();
  const GridParams params = grid(2e-3);
  const BoundaryFunction g = BoundaryFunction::exp_indicator(1.0, 0, 20.0);
  const StateTable J = extract_J(solve_passage(model, g, 0.0, params));
  const StateTable G = apply_G(model, g, J);
  for (int k = 0; k < G.size() && G.s(k) <= 5.0; k += 50) {
    CHECK(std::abs(G.values(k, 0) - std::exp(-G.s(k)) * -kRoot3) <= 5.0 * (params.ds + params.da));
  }
}

TEST_CASE("zero boundary data gives zero everywhere") {
  const FluidModel model = sinusoidal();
  const BoundaryFunction g = BoundaryFunction::zero(5.0);
  const GridFunction F = solve_passage(model, g, 1.0, grid(1e-2));
  CHECK(*std::max_element(F.values.begin(), F.values.end()) == 0.0);
  CHECK(*std::min_element(F.values.begin(), F.values.end()) == 0.0);
  CHECK(extract_J(F).max_abs() == 0.0);
  CHECK(apply_G(model, g, extract_J(solve_passage(model, g, 0.0, grid(1e-2)))).max_abs() == 0.0);
  CHECK(identity_whd_residual(model, g, grid(1e-2)).max_norm == 0.0);
}

TEST_CASE("level zero returns g on the hit class") {
  const FluidModel model = sinusoidal();
  const BoundaryFunction g = BoundaryFunction::exp_indicator(2.0, 0, 10.0);
  const StateTable P = extract_P(solve_passage(model, g, 0.0, grid(1e-2)));
  for (int k = 0; k < P.size(); ++k) REQUIRE(P.values(k, 0) == g(P.s(k), 0));

  const BoundaryFunction gm = BoundaryFunction::exp_indicator(2.0, 1, 10.0);
  const StateTable Pm = extract_P(solve_passage_minus(model, gm, 0.0, grid(1e-2)));
  for (int k = 0; k < Pm.size(); ++k) REQUIRE(Pm.values(k, 0) == gm(Pm.s(k), 1));
}

TEST_CASE("positivity and contraction for random tables") {
  const FluidModel model = three_state(1.0);
  for (std::uint64_t trial = 0; trial < 4; ++trial) {
    PhiloxStream rng(17, trial);
    StateTable t;
    t.ds = 0.25;
    t.states = model.space.plus();
    t.values = Matrix(33, 2);
    for (Eigen::Index k = 0; k < t.values.size(); ++k) t.values.data()[k] = rng.uniform();
    const double norm = t.values.maxCoeff();
    const BoundaryFunction g = BoundaryFunction::table(t, 8.0);
    const GridFunction F = solve_passage(model, g, 0.7, grid(5e-3));
    CHECK(*std::min_element(F.values.begin(), F.values.end()) >= 0.0);
    CHECK(*std::max_element(F.values.begin(), F.values.end()) <= norm);
    CHECK(extract_P(F).max_abs() <= norm);
  }
}

TEST_CASE("support is preserved with exact zeros") {
  const FluidModel model = three_state(1.0);
  const double eta = 3.0;
  GridParams params = grid(5e-3);
  params.s_max = 5.0;
  const BoundaryFunction g = BoundaryFunction::exp_indicator(1.0, 1, eta);
  const GridFunction F = solve_passage(model, g, 1.0, params);
  for (const StateTable& t : {extract_J(F), extract_P(F), extract_level_values(F)}) {
    for (int k = 0; k < t.size(); ++k) {
      if (t.s(k) >= eta) REQUIRE(t.values.row(k).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  CHECK(extract_P(F).values(0, 1) > 0.0);
}

TEST_CASE("mirrored model: minus passage equals plus passage") {
  const FluidModel up = three_state(1.0);
  const FluidModel down = three_state(-1.0);
  const BoundaryFunction g = BoundaryFunction::exp_indicator(1.0, 0, 6.0);
  const GridFunction Fp = solve_passage(up, g, 0.8, grid(5e-3));
  const GridFunction Fm = solve_passage_minus(down, g, 0.8, grid(5e-3));
  CHECK(Fm.hit_states == Fp.hit_states);
  CHECK((Fm.zero_row - Fp.zero_row).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((Fm.level_row - Fp.level_row).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("symmetric model: minus side equals plus side after swapping states") {
  const FluidModel model = symmetric();
  const GridFunction Fp = solve_passage(model, BoundaryFunction::exp_indicator(1.0, 0, 10.0), 1.0, grid(5e-3));
  const GridFunction Fm =
      solve_passage_minus(model, BoundaryFunction::exp_indicator(1.0, 1, 10.0), 1.0, grid(5e-3));
  CHECK((Fp.zero_row.col(0) - Fm.zero_row.col(1)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((Fp.zero_row.col(1) - Fm.zero_row.col(0)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("the d/ds J identity") {
  const BoundaryFunction g = BoundaryFunction::exp_indicator(1.0, 0, 20.0);
  const GridParams params = grid(2e-3);
  CHECK(identity_whd_residual(symmetric(), g, params).max_norm <= 5.0 * (params.ds + params.da));
  const double coarse = identity_whd_residual(sinusoidal(), g, grid(4e-3)).max_norm;
  const double fine = identity_whd_residual(sinusoidal(), g, grid(2e-3)).max_norm;
  CHECK(coarse / fine >= 1.8);
}

TEST_CASE("discrete modulus of continuity") {
  const FluidModel model = sinusoidal();
  const BoundaryFunction g = BoundaryFunction::exp_indicator(1.0, 0, 10.0);
  const GridFunction F = solve_passage(model, g, 1.0, grid(5e-3));
  const ModulusCheck m = check_modulus(model, g, F, 0.0);
  CHECK(m.within);
  CHECK(m.worst_ratio <= 1.0);
}

TEST_CASE("grid and domain errors") {
  const FluidModel model = sinusoidal();
  const BoundaryFunction g = BoundaryFunction::exp_indicator(1.0, 0, 5.0);
  CHECK(code_of([&] { solve_passage(model, g, 1.0, grid(0.9)); }) == ErrorCode::GridError);
  GridParams short_s = grid(1e-2);
  short_s.s_max = 4.0;
  CHECK(code_of([&] { solve_passage(model, g, 1.0, short_s); }) == ErrorCode::DomainError);
  GridParams high_a = grid(1e-2);
  high_a.a_min = 0.5;
  CHECK(code_of([&] { solve_passage(model, g, 1.0, high_a); }) == ErrorCode::DomainError);
  CHECK(code_of([&] { solve_passage(model, g, -1.0, grid(1e-2)); }) == ErrorCode::DomainError);

  StateTable t;
  t.ds = 0.1;
  t.states = {0};
  t.values = Matrix::Ones(10, 1);
  const BoundaryFunction rough = BoundaryFunction::table(t, 1.0);
  const StateTable J = extract_J(solve_passage(model, rough, 0.0, grid(1e-2)));
  CHECK(code_of([&] { apply_G(model, rough, J); }) == ErrorCode::DerivativeUnavailable);
}
