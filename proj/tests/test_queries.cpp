#include <doctest.h>

#include <cmath>
#include <vector>

#include "fluidhopf/mc_oracle.hpp"
#include "fluidhopf/queries.hpp"

using namespace fluidhopf;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

const StateSpace kTwo({"+", "-"}, {1.0, -1.0});

FluidModel symmetric() { return FluidModel{kTwo, GeneratorFamily::constant(mat2(-1, 1, 1, -1), 1.0)}; }

FluidModel sinusoidal() {
  const Matrix B = mat2(-1, 1, 1, -1);
  return FluidModel{kTwo, GeneratorFamily(FourierPolynomialGenerator{B, {FourierTerm{0.5 * B, 1.0, 0.0}}, {}}, 1.5)};
}

GridParams grid(double step) {
  GridParams p;
  p.ds = step;
  p.da = step;
  return p;
}

}  // namespace

TEST_CASE("constant model: table at s = 0 against the factorization blocks") {
  const LaplaceTable t = laplace_passage_table(symmetric(), 1.0, 1.0, Sign::Plus, grid(2e-3));
  const double tol = 10.0 * 4e-3;
  const double q = std::exp(-std::sqrt(3.0));
  CHECK(t.to_states == std::vector<int>{0});
  CHECK(std::abs(t.values[0](0, 0) - q) <= tol);
  CHECK(std::abs(t.values[0](1, 0) - (2.0 - std::sqrt(3.0)) * q) <= tol);
}

TEST_CASE("level zero from the hit class is the identity") {
  const LaplaceTable t = laplace_passage_table(sinusoidal(), 2.0, 0.0, Sign::Plus, grid(5e-3));
  for (int k = 0; k < t.s_count() && k * t.ds <= 5.0; k += 40) CHECK(t.values[k](0, 0) == doctest::Approx(1.0));
}

TEST_CASE("entries decrease in the discount") {
  const FluidModel model = sinusoidal();
  const LaplaceTable low = laplace_passage_table(model, 0.5, 0.7, Sign::Plus, grid(5e-3), 40.0);
  const LaplaceTable high = laplace_passage_table(model, 1.5, 0.7, Sign::Plus, grid(5e-3), 40.0);
  for (int k = 0; k < 1000; k += 50) {
    for (int i = 0; i < 2; ++i) CHECK(low.values[k](i, 0) >= high.values[k](i, 0));
  }
}

TEST_CASE("time-varying table against Monte Carlo") {
  const FluidModel model = sinusoidal();
  const double c = 1.0, level = 0.5;
  const LaplaceTable t = laplace_passage_table(model, c, level, Sign::Minus, grid(2e-3));
  for (int i : {0, 1}) {
    ExpectationQuery q;
    q.i0 = i;
    q.level = level;
    q.sign = Sign::Minus;
    q.n = 200'000;
    q.seed = 31;
    q.discount = c;
    const Estimate e = estimate_expectation(model, BoundaryFunction::exp_indicator(c, 1, default_support(c)), q);
    // Table entries are divided by exp(-c s); at s = 0 that factor is one.
    CHECK(std::abs(t.values[0](i, 0) - e.mean) <= 3.0 * e.std_error + 2.0 * 4e-3);
  }
}

TEST_CASE("cross-check outcomes") {
  const CrosscheckReport ok = homog_crosscheck(symmetric(), 1.0, 1.0, grid(2e-3));
  CHECK(ok.pass);
  CHECK(ok.max_deviation <= ok.tolerance);
  CHECK(ok.s_checked.size() >= 2);

  const FluidModel frozen{kTwo, GeneratorFamily::constant(Matrix::Zero(2, 2), 1.0)};
  CHECK(homog_crosscheck(frozen, 1.0, 1.0, grid(2e-3)).max_deviation <= 1e-12);

  const CrosscheckReport coarse = homog_crosscheck(symmetric(), 1.0, 1.0, grid(0.1));
  CHECK(coarse.max_deviation > 0.0);
  CHECK(coarse.tolerance == doctest::Approx(2.0));

  try {
    homog_crosscheck(sinusoidal(), 1.0, 1.0, grid(1e-2));
    FAIL("expected NotConstantFamily");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotConstantFamily);
  }
}

TEST_CASE("Gaver-Stehfest on textbook transform pairs") {
  // unit point mass at 1: transform exp(-c), CDF at t = 2 is 1
  CHECK(invert_laplace([](double c) { return std::exp(-c); }, 2.0, InversionTarget::Cdf) ==
        doctest::Approx(1.0).epsilon(0.05));
  // Exp(1) density
  CHECK(invert_laplace([](double c) { return 1.0 / (1.0 + c); }, 1.0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(0.05));
  CHECK(invert_laplace([](double) { return 0.0; }, 1.0) == 0.0);

  const std::vector<double> nodes = gaver_stehfest_nodes(2.0);
  CHECK(nodes.size() == 12);
  CHECK(nodes.front() == doctest::Approx(std::log(2.0) / 2.0));
}

TEST_CASE("Gaver-Stehfest input validation") {
  auto code = [](const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ConfigError;
  };
  const std::vector<double> few(4, 1.0);
  CHECK(code([&] { invert_laplace(few, 1.0); }) == ErrorCode::DomainError);
  CHECK(code([] { gaver_stehfest_nodes(0.0); }) == ErrorCode::DomainError);
  // Oscillatory inverse sin(3t): orders 10 and 12 disagree.
  CHECK(code([] { invert_laplace([](double c) { return 3.0 / (c * c + 9.0); }, 1.0); }) ==
        ErrorCode::IllConditioned);
}

TEST_CASE("passage-time density of the absorbing chain via inversion") {
  // Up-crossing of level 1 from +1 happens at tau = 1 with probability e^-1:
  // E[exp(-c tau) 1{tau < inf}] = exp(-(1 + c)); its CDF at t = 3 is e^-1.
  auto transform = [](double c) { return std::exp(-(1.0 + c)); };
  CHECK(invert_laplace(transform, 3.0, InversionTarget::Cdf) == doctest::Approx(std::exp(-1.0)).epsilon(0.05));
}
