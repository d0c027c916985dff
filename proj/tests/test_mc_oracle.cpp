#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "fluidhopf/evolution.hpp"
#include "fluidhopf/mc_oracle.hpp"

using namespace fluidhopf;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

const StateSpace kTwo({"+", "-"}, {1.0, -1.0});

FluidModel constant_model(const Matrix& L, double K) { return FluidModel{kTwo, GeneratorFamily::constant(L, K)}; }

FluidModel sinusoidal() {
  const Matrix B = mat2(-1, 1, 1, -1);
  return FluidModel{kTwo, GeneratorFamily(FourierPolynomialGenerator{B, {FourierTerm{0.5 * B, 1.0, 0.0}}, {}}, 1.5)};
}

FluidModel three_state() {
  Matrix L(3, 3);
  L << -2, 1, 1, 0.5, -1, 0.5, 1, 2, -3;
  return FluidModel{StateSpace({"a", "b", "c"}, {1.0, 2.0, -1.5}),
                    GeneratorFamily(FourierPolynomialGenerator{L, {FourierTerm{0.2 * L, 1.0, 0.0}}, {}}, 3.6)};
}

BoundaryFunction one(double support) {
  return BoundaryFunction([](double, int) { return 1.0; }, [](double, int) { return 0.0; }, support, 1.0);
}

double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double F = cdf(x[k]);
    d = std::max({d, F - k / n, (k + 1) / n - F});
  }
  return d;
}

}  // namespace

TEST_CASE("Philox4x32-10 known answer") {
  // Reference block for key 0, counter 0 from the Random123 test vectors.
  PhiloxStream rng(0, 0);
  const std::uint64_t a = rng.next_u64();
  const std::uint64_t b = rng.next_u64();
  CHECK(a == 0x6627e8d5e169c58dULL);
  CHECK(b == 0xbc57ac4c9b00dbd8ULL);
}

TEST_CASE("uniform draws stay inside the open unit interval") {
  PhiloxStream rng(3, 9);
  for (int k = 0; k < 100'000; ++k) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("holding times: Kolmogorov-Smirnov against the closed-form survival") {
  constexpr int n = 100'000;
  const double critical = 1.6276 / std::sqrt(static_cast<double>(n));
  const FluidModel constant = constant_model(mat2(-1, 1, 1, -1), 1.0);
  const FluidModel varying = sinusoidal();
  std::vector<double> a(n), b(n), c(n);
  for (int k = 0; k < n; ++k) {
    PhiloxStream r1(1, k), r2(2, k), r3(3, k);
    a[k] = sample_holding_time(constant.family, 0, 0.0, 1e3, r1);
    b[k] = sample_holding_time(varying.family, 0, 0.0, 1e3, r2);
    c[k] = sample_holding_time_thinning(varying.family, 0, 0.0, 1e3, r3);
  }
  CHECK(ks_statistic(a, [](double r) { return 1.0 - std::exp(-r); }) < critical);
  auto survival = [](double r) { return 1.0 - std::exp(-r - 0.5 * (1.0 - std::cos(r))); };
  CHECK(ks_statistic(b, survival) < critical);
  CHECK(ks_statistic(c, survival) < critical);
}

TEST_CASE("holding time from a later start uses the shifted hazard") {
  constexpr int n = 50'000;
  const FluidModel varying = sinusoidal();
  const double s = 2.0;
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) {
    PhiloxStream rng(4, k);
    x[k] = sample_holding_time(varying.family, 0, s, 1e3, rng) - s;
  }
  auto cdf = [s](double r) { return 1.0 - std::exp(-r - 0.5 * (std::cos(s) - std::cos(s + r))); };
  CHECK(ks_statistic(x, cdf) < 1.6276 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("absorbing state: no jumps until the horizon") {
  const FluidModel model = constant_model(mat2(-1, 1, 0, 0), 1.0);
  PhiloxStream rng(1, 0);
  CHECK(std::isinf(sample_holding_time(model.family, 1, 0.0, 10.0, rng)));
  const PathSample path = sample_path(model, 0.5, 1, 7.0, rng);
  CHECK(path.jump_times.empty());
  CHECK(path.states == std::vector<int>{1});
  CHECK(path.phi.back() == doctest::Approx(-6.5));
}

TEST_CASE("deterministic drift and censoring") {
  const FluidModel stuck = constant_model(mat2(0, 0, 1, -1), 1.0);
  PhiloxStream rng(1, 0);
  const PassageSample hit = passage_functional(sample_path(stuck, 2.0, 0, 10.0, rng), stuck.space, 0.5, Sign::Plus);
  CHECK_FALSE(hit.censored);
  CHECK(hit.tau == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(hit.hit_state == 0);

  const FluidModel sink = constant_model(mat2(-1, 1, 0, 0), 1.0);
  const PassageSample miss = passage_functional(sample_path(sink, 0.0, 1, 10.0, rng), sink.space, 0.5, Sign::Plus);
  CHECK(miss.censored);
  CHECK(miss.hit_state == kCoffin);
  CHECK(std::isinf(miss.tau));
}

TEST_CASE("early-stopping simulation agrees with the full path") {
  const FluidModel model = three_state();
  for (std::uint64_t k = 0; k < 500; ++k) {
    PhiloxStream a(8, k), b(8, k);
    const PassageSample full =
        passage_functional(sample_path(model, 0.3, 2, 30.0, a), model.space, 1.2, Sign::Plus);
    const PassageSample fast = simulate_passage(model, 0.3, 2, 1.2, Sign::Plus, 30.0, b);
    REQUIRE(full.censored == fast.censored);
    REQUIRE(full.hit_state == fast.hit_state);
    if (!full.censored) REQUIRE(full.tau == doctest::Approx(fast.tau).epsilon(1e-12));
  }
}

TEST_CASE("every finite passage lands in the hit class") {
  const FluidModel model = three_state();
  for (std::uint64_t k = 0; k < 5'000; ++k) {
    PhiloxStream rng(9, k);
    const int start = static_cast<int>(k % 3);
    const PassageSample up = simulate_passage(model, 0.0, start, 0.7, Sign::Plus, 50.0, rng);
    if (!up.censored) REQUIRE(model.space.is_plus(up.hit_state));
    const PassageSample down = simulate_passage(model, 0.0, start, 0.7, Sign::Minus, 50.0, rng);
    if (!down.censored) REQUIRE_FALSE(model.space.is_plus(down.hit_state));
  }
}

TEST_CASE("absorbing chain: finite and infinite plus-passages") {
  const FluidModel model = constant_model(mat2(-1, 1, 0, 0), 1.0);
  for (double level : {0.5, 1.0, 2.0}) {
    ExpectationQuery q;
    q.level = level;
    q.n = 200'000;
    q.seed = 5;
    const Estimate e = estimate_expectation(model, one(100.0), q);
    CHECK(std::abs(e.mean - std::exp(-level)) <= 3.0 * e.std_error);
    CHECK(std::abs(e.censor_fraction - (1.0 - std::exp(-level))) <= 3.0 * e.std_error);
  }
}

TEST_CASE("discounted up-crossing from the minus class") {
  const FluidModel model = constant_model(mat2(-1, 1, 1, -1), 1.0);
  ExpectationQuery q;
  q.i0 = 1;
  q.level = 0.0;
  q.n = 200'000;
  q.seed = 6;
  q.discount = 1.0;
  const Estimate e = estimate_expectation(model, BoundaryFunction::exp_indicator(1.0, 0, 40.0), q);
  CHECK(std::abs(e.mean - (2.0 - std::sqrt(3.0))) <= 3.0 * e.std_error);
}

TEST_CASE("zero boundary data") {
  ExpectationQuery q;
  q.n = 1000;
  const Estimate e = estimate_expectation(sinusoidal(), BoundaryFunction::zero(5.0), q);
  CHECK(e.mean == 0.0);
  CHECK(e.std_error == 0.0);
}

TEST_CASE("short horizons report a bias bound") {
  ExpectationQuery q;
  q.n = 1000;
  q.level = 1.0;
  q.horizon = 3.0;
  q.discount = 1.0;
  const Estimate e = estimate_expectation(sinusoidal(), BoundaryFunction::exp_indicator(1.0, 0, 20.0), q);
  CHECK(e.bias_bound == doctest::Approx(std::exp(-3.0)));
  q.horizon = 0.0;
  CHECK(estimate_expectation(sinusoidal(), BoundaryFunction::exp_indicator(1.0, 0, 20.0), q).bias_bound == 0.0);
}

TEST_CASE("estimates are bitwise reproducible across runs and thread counts") {
  const FluidModel model = three_state();
  const BoundaryFunction g = BoundaryFunction::exp_indicator(0.5, 1, 30.0);
  ExpectationQuery q;
  q.i0 = 2;
  q.level = 0.8;
  q.n = 20'000;
  q.seed = 99;
  const Estimate a = estimate_expectation(model, g, q, 1);
  const Estimate b = estimate_expectation(model, g, q, 1);
  const Estimate c = estimate_expectation(model, g, q, 5);
  CHECK(std::memcmp(&a.mean, &b.mean, sizeof(double)) == 0);
  CHECK(std::memcmp(&a.mean, &c.mean, sizeof(double)) == 0);
  CHECK(std::memcmp(&a.std_error, &c.std_error, sizeof(double)) == 0);
  CHECK(a.censor_fraction == c.censor_fraction);
  q.seed = 100;
  CHECK(estimate_expectation(model, g, q, 1).mean != a.mean);
}

TEST_CASE("second jump within a short window") {
  const FluidModel model = sinusoidal();
  const double K = model.family.bound_K();
  constexpr int n = 100'000;
  for (double r : {0.01, 0.05, 0.1}) {
    int count = 0;
    for (int k = 0; k < n; ++k) {
      PhiloxStream rng(12, k);
      count += sample_path(model, 0.0, 0, r, rng).jump_times.size() >= 2 ? 1 : 0;
    }
    const double p = static_cast<double>(count) / n;
    const double se = std::sqrt(std::max(p * (1 - p), 1.0 / n) / n);
    CHECK(p <= K * K * r * r + 3.0 * se);
  }
}

TEST_CASE("state marginals match the evolution matrix") {
  const FluidModel model = three_state();
  const double t = 1.5;
  constexpr int n = 100'000;
  const Matrix U = evolution_matrix(model.family, 0.0, t, 1e-3).P;
  for (int start = 0; start < 3; ++start) {
    Vector counts = Vector::Zero(3);
    for (int k = 0; k < n; ++k) {
      PhiloxStream rng(13 + start, k);
      counts(sample_path(model, 0.0, start, t, rng).states.back()) += 1.0;
    }
    for (int j = 0; j < 3; ++j) {
      const double p = counts(j) / n;
      const double se = std::sqrt(U(start, j) * (1 - U(start, j)) / n);
      CHECK(std::abs(p - U(start, j)) <= 4.0 * se);
    }
  }
}
