#include "fluidhopf/verify.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

#include "fluidhopf/evolution.hpp"
#include "fluidhopf/homog_wh.hpp"
#include "fluidhopf/mc_oracle.hpp"
#include "fluidhopf/passage_pde.hpp"
#include "fluidhopf/queries.hpp"

namespace fluidhopf {

namespace {

Check make_check(std::string label, double measured, double tolerance, Relation relation = Relation::AtMost) {
  Check c{std::move(label), measured, tolerance, relation, false};
  switch (relation) {
    case Relation::AtMost: c.pass = measured <= tolerance; break;
    case Relation::Below: c.pass = measured < tolerance; break;
    case Relation::AtLeast: c.pass = measured >= tolerance; break;
  }
  return c;
}

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

Matrix two_state(double alpha, double beta) {
  Matrix L(2, 2);
  L << -alpha, alpha, beta, -beta;
  return L;
}

FluidModel symmetric_model() {
  return FluidModel{StateSpace({"+", "-"}, {1.0, -1.0}), GeneratorFamily::constant(two_state(1.0, 1.0), 1.0)};
}

// Lambda_s = (1 + 0.5 sin s) [[-1, 1], [1, -1]]
FluidModel sinusoidal_model() {
  const Matrix B = two_state(1.0, 1.0);
  FourierPolynomialGenerator fp{B, {FourierTerm{0.5 * B, 1.0, 0.0}}, {}};
  return FluidModel{StateSpace({"+", "-"}, {1.0, -1.0}), GeneratorFamily(fp, 1.5)};
}

GridParams grid(double step) {
  GridParams p;
  p.ds = step;
  p.da = step;
  return p;
}

double max_abs_diff(const StateTable& a, const StateTable& b, int stride_b = 1) {
  double worst = 0.0;
  for (int k = 0; k < a.size() && k * stride_b < b.size(); ++k) {
    for (Eigen::Index c = 0; c < a.values.cols(); ++c) {
      worst = std::max(worst, std::abs(a.values(k, c) - b.values(k * stride_b, c)));
    }
  }
  return worst;
}

StateTable columns(const StateTable& t, const std::vector<int>& states) {
  StateTable out;
  out.ds = t.ds;
  out.states = states;
  out.values.resize(t.values.rows(), static_cast<Eigen::Index>(states.size()));
  for (std::size_t c = 0; c < states.size(); ++c) out.values.col(c) = t.values.col(t.column_of(states[c]));
  return out;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

long mismatches(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return static_cast<long>(std::max(a.size(), b.size()));
  long n = 0;
  for (std::size_t k = 0; k < a.size(); ++k) n += same_bits(a[k], b[k]) ? 0 : 1;
  return n;
}

long mismatches(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::max(a.size(), b.size());
  long n = 0;
  for (Eigen::Index k = 0; k < a.size(); ++k) n += same_bits(a.data()[k], b.data()[k]) ? 0 : 1;
  return n;
}

// ---------------------------------------------------------------------------

CriterionResult factorization_battery(const SuiteOptions& opt) {
  CriterionResult r{1, "factorization residual on random generators", {}, 0.0};
  constexpr int kDraws = 200;
  const double discounts[] = {0.1, 1.0, 10.0};
  double residual = 0.0, pi_max_row = 0.0, q_max_row = -INFINITY;
  long pi_outside = 0, q_negative_offdiag = 0, failures = 0;

  for (int draw = 0; draw < kDraws; ++draw) {
    PhiloxStream rng(opt.seed, 0x1000 + static_cast<std::uint64_t>(draw));
    const int m = 2 + static_cast<int>(rng.next_u64() % 7);
    const int forced_plus = static_cast<int>(rng.next_u64() % m);
    const int forced_minus = (forced_plus + 1 + static_cast<int>(rng.next_u64() % (m - 1))) % m;
    std::vector<double> v(m);
    for (int i = 0; i < m; ++i) {
      const double magnitude = 0.5 + 1.5 * rng.uniform();
      const bool plus = i == forced_plus || (i != forced_minus && rng.uniform() < 0.5);
      v[i] = plus ? magnitude : -magnitude;
    }
    Matrix L = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        const double u = rng.uniform();
        L(i, j) = u < 0.25 ? 0.0 : rng.uniform() * 5.0 / (m - 1);
      }
      L(i, i) = -L.row(i).sum();
    }
    const StateSpace space({}, v);
    const double c = discounts[draw % 3];
    try {
      const HomogFactorization f = factorize(L, space, c);
      residual = std::max(residual, factorization_residual(f, L, space));
      for (const Matrix* P : {&f.Pi_plus, &f.Pi_minus}) {
        pi_outside += (P->array() < 0.0 || P->array() > 1.0).count();
        if (P->size() > 0) pi_max_row = std::max(pi_max_row, P->rowwise().sum().maxCoeff());
      }
      for (const Matrix* Q : {&f.Q_plus, &f.Q_minus}) {
        for (Eigen::Index i = 0; i < Q->rows(); ++i) {
          for (Eigen::Index j = 0; j < Q->cols(); ++j) q_negative_offdiag += (i != j && (*Q)(i, j) < 0.0) ? 1 : 0;
        }
        q_max_row = std::max(q_max_row, Q->rowwise().sum().maxCoeff());
      }
    } catch (const Error&) {
      ++failures;
    }
  }
  r.checks.push_back(make_check("solver failures", static_cast<double>(failures), 0.0));
  r.checks.push_back(make_check("max residual", residual, 1e-10));
  r.checks.push_back(make_check("Pi entries outside [0,1]", static_cast<double>(pi_outside), 0.0));
  r.checks.push_back(make_check("max Pi row sum", pi_max_row, 1.0, Relation::Below));
  r.checks.push_back(make_check("negative Q off-diagonals", static_cast<double>(q_negative_offdiag), 0.0));
  r.checks.push_back(make_check("max Q row sum", q_max_row, 0.0));
  return r;
}

CriterionResult closed_form(const SuiteOptions&) {
  CriterionResult r{2, "closed-form two-state factorization", {}, 0.0};
  const double alpha = 1.0, beta = 1.0, c = 1.0;
  // Pi solves alpha pi^2 - (alpha + beta + 2c) pi + beta = 0, smaller root.
  const double b = alpha + beta + 2.0 * c;
  const double pi = (b - std::sqrt(b * b - 4.0 * alpha * beta)) / (2.0 * alpha);
  const double q = -(alpha + c) + alpha * pi;
  const FluidModel model = symmetric_model();
  const HomogFactorization f = factorize(model.family.eval(0.0), model.space, c);
  r.checks.push_back(make_check("|Pi+ - quadratic root|", std::abs(f.Pi_plus(0, 0) - pi), 1e-12));
  r.checks.push_back(make_check("|Q+ - quadratic value|", std::abs(f.Q_plus(0, 0) - q), 1e-12));
  r.checks.push_back(make_check("|Pi+ - (2 - sqrt 3)|", std::abs(f.Pi_plus(0, 0) - (2.0 - std::sqrt(3.0))), 1e-12));
  r.checks.push_back(make_check("|Q+ + sqrt 3|", std::abs(f.Q_plus(0, 0) + std::sqrt(3.0)), 1e-12));
  r.checks.push_back(make_check("|Pi- - (2 - sqrt 3)|", std::abs(f.Pi_minus(0, 0) - (2.0 - std::sqrt(3.0))), 1e-12));
  r.checks.push_back(make_check("|Q- + sqrt 3|", std::abs(f.Q_minus(0, 0) + std::sqrt(3.0)), 1e-12));
  return r;
}

CriterionResult absorbing_chain(const SuiteOptions& opt) {
  CriterionResult r{3, "finite plus-passages of the absorbing two-state chain", {}, 0.0};
  Matrix L(2, 2);
  L << -1.0, 1.0, 0.0, 0.0;
  const FluidModel model{StateSpace({"+1", "-1"}, {1.0, -1.0}), GeneratorFamily::constant(L, 1.0)};
  const BoundaryFunction one([](double, int) { return 1.0; }, [](double, int) { return 0.0; }, 100.0, 1.0);
  for (double level : {0.5, 1.0, 2.0}) {
    ExpectationQuery q;
    q.i0 = 0;
    q.level = level;
    q.n = opt.n_mc;
    q.seed = opt.seed;
    const Estimate e = estimate_expectation(model, one, q, opt.threads);
    const std::string at = "l=" + fmt("%g", level);
    r.checks.push_back(make_check(at + " |finite - e^-l| / stderr", std::abs(e.mean - std::exp(-level)) / e.std_error, 3.0));
    r.checks.push_back(make_check(at + " |infinite - (1 - e^-l)| / stderr",
                                  std::abs((1.0 - e.mean) - (1.0 - std::exp(-level))) / e.std_error, 3.0));
  }
  return r;
}

CriterionResult homogeneous_reduction(const SuiteOptions&) {
  CriterionResult r{4, "PDE table against the constant-generator factorization", {}, 0.0};
  const FluidModel sym = symmetric_model();
  const CrosscheckReport coarse = homog_crosscheck(sym, 1.0, 1.0, grid(1e-3));
  const CrosscheckReport fine = homog_crosscheck(sym, 1.0, 1.0, grid(5e-4));
  const CrosscheckReport minus = homog_crosscheck(sym, 1.0, 1.0, grid(1e-3), Sign::Minus);
  r.checks.push_back(make_check("two-state plus deviation", coarse.max_deviation, coarse.tolerance));
  r.checks.push_back(make_check("two-state minus deviation", minus.max_deviation, minus.tolerance));
  r.checks.push_back(make_check("two-state halving ratio", coarse.max_deviation / fine.max_deviation, 1.8, Relation::AtLeast));

  Matrix L3(3, 3);
  L3 << -2.0, 1.0, 1.0, 0.5, -1.0, 0.5, 1.0, 2.0, -3.0;
  const FluidModel three{StateSpace({"a", "b", "c"}, {1.0, 2.0, -1.5}), GeneratorFamily::constant(L3, 3.0)};
  const CrosscheckReport r3 = homog_crosscheck(three, 1.0, 1.0, grid(1e-3));
  r.checks.push_back(make_check("three-state plus deviation", r3.max_deviation, r3.tolerance));
  return r;
}

CriterionResult inhomogeneous_mc(const SuiteOptions& opt) {
  CriterionResult r{5, "time-varying PDE against Monte Carlo", {}, 0.0};
  const FluidModel model = sinusoidal_model();
  const double c = 1.0;
  const BoundaryFunction g = BoundaryFunction::exp_indicator(c, 0, default_support(c));
  for (double level : {0.5, 1.0}) {
    const StateTable pde = extract_level_values(solve_passage(model, g, level, grid(5e-4)));
    for (int i : {0, 1}) {
      ExpectationQuery q;
      q.i0 = i;
      q.level = level;
      q.n = opt.n_mc;
      q.seed = opt.seed;
      q.discount = c;
      const Estimate e = estimate_expectation(model, g, q, opt.threads);
      const double value = pde.values(0, pde.column_of(i));
      r.checks.push_back(make_check("l=" + fmt("%g", level) + " start " + model.space.labels()[i] + " |PDE - MC|",
                                    std::abs(value - e.mean), 3.0 * e.std_error + e.bias_bound));
    }
  }
  return r;
}

CriterionResult semigroup_composition(const SuiteOptions&) {
  CriterionResult r{6, "semigroup and composition identities", {}, 0.0};
  const FluidModel model = sinusoidal_model();
  const double support = 20.0, level = 0.5, h = 0.5;
  const BoundaryFunction g = BoundaryFunction::exp_indicator(1.0, 0, support);
  const GridParams coarse = grid(2e-3), fine = grid(1e-3);

  // P_{l+h} g against P_l (P_h g); error scale from the coarse/fine gap of the direct solve.
  const StateTable direct = extract_P(solve_passage(model, g, level + h, coarse));
  const StateTable direct_fine = extract_P(solve_passage(model, g, level + h, fine));
  const double grid_error = 2.0 * max_abs_diff(direct, direct_fine, 2);
  const BoundaryFunction Ph = BoundaryFunction::table(extract_P(solve_passage(model, g, h, coarse)), support);
  const StateTable composed = extract_P(solve_passage(model, Ph, level, coarse));
  r.checks.push_back(make_check("|P_(l+h) g - P_l P_h g|", max_abs_diff(composed, direct), 2.0 * grid_error));
  // On a shared grid the discrete scheme composes almost exactly, so also compare with the finer solve.
  r.checks.push_back(make_check("|P_(l+h) g (fine) - P_l P_h g|", max_abs_diff(composed, direct_fine, 2),
                                2.0 * grid_error));

  // Minus-class values at a = 0 against J applied to P_l g.
  const std::vector<int>& minus = model.space.minus();
  const GridFunction F = solve_passage(model, g, level, coarse);
  const StateTable lower = columns(extract_level_values(F), minus);
  const StateTable lower_fine = columns(extract_level_values(solve_passage(model, g, level, fine)), minus);
  const double j_error = 2.0 * max_abs_diff(lower, lower_fine, 2);
  const BoundaryFunction Pl = BoundaryFunction::table(extract_P(F), support);
  const StateTable JP = extract_J(solve_passage(model, Pl, 0.0, coarse));
  r.checks.push_back(make_check("|F(., E-, 0) - J P_l g|", max_abs_diff(JP, lower), 2.0 * j_error));
  r.checks.push_back(make_check("|F(., E-, 0) (fine) - J P_l g|", max_abs_diff(JP, lower_fine, 2), 2.0 * j_error));
  return r;
}

CriterionResult generator_identities(const SuiteOptions&) {
  CriterionResult r{7, "generator identities", {}, 0.0};
  const FluidModel model = sinusoidal_model();
  const double support = 20.0, step = 1e-3;
  const BoundaryFunction g = BoundaryFunction::exp_indicator(1.0, 0, support);
  const GridParams params = grid(step);
  const std::vector<int>& hit = model.space.plus();

  // Sup norms of g, g', g'' on the hit class, the last by differencing g'.
  double g0 = 0.0, g1 = 0.0, g2 = 0.0;
  constexpr double kProbe = 1e-4;
  for (int i : hit) {
    for (double s = 0.0; s < support; s += kProbe) {
      g0 = std::max(g0, std::abs(g(s, i)));
      g1 = std::max(g1, std::abs(g.derivative(s, i)));
      g2 = std::max(g2, std::abs(g.derivative(s + kProbe, i) - g.derivative(s, i)) / kProbe);
    }
  }
  const double K = model.family.bound_K();
  const double v_min = model.space.v_min();
  const double C = (0.5 * g2 + 2.0 * K * g1 + 2.0 * K * K * g0) / (v_min * v_min);
  const double grid_error = 5.0 * (params.ds + params.da) * g0;

  const StateTable J = extract_J(solve_passage(model, g, 0.0, params));
  const StateTable G = apply_G(model, g, J);
  double previous = INFINITY;
  for (double h : {1e-2, 1e-3}) {
    const StateTable P = extract_P(solve_passage(model, g, h, params));
    double err = 0.0;
    for (int k = 0; k < P.size() && P.s(k) + h <= support; ++k) {
      for (int i : hit) {
        const double quotient = (P.values(k, P.column_of(i)) - g(P.s(k), i)) / h;
        err = std::max(err, std::abs(quotient - G.values(k, G.column_of(i))));
      }
    }
    r.checks.push_back(make_check("h=" + fmt("%g", h) + " |(P_h g - g)/h - G g|", err, C * h + grid_error));
    if (std::isfinite(previous)) {
      r.checks.push_back(make_check("error decrease factor h=1e-2 -> 1e-3", previous / err, 1.0, Relation::AtLeast));
    }
    previous = err;
  }

  const double coarse = identity_whd_residual(model, g, grid(2e-3)).max_norm;
  const double fine = identity_whd_residual(model, g, grid(1e-3)).max_norm;
  r.checks.push_back(make_check("d/ds J g halving ratio", coarse / fine, 1.8, Relation::AtLeast));
  return r;
}

CriterionResult jump_law(const SuiteOptions& opt) {
  CriterionResult r{8, "jump-law statistics", {}, 0.0};
  constexpr long kSamples = 100'000;
  const double critical = 1.6276 / std::sqrt(static_cast<double>(kSamples));  // 1% level

  struct Case {
    std::string name;
    FluidModel model;
    std::function<double(double)> hazard;  // integral of the exit rate of state 0 over [0, r]
  };
  const std::vector<Case> cases = {
      {"constant", symmetric_model(), [](double t) { return t; }},
      {"sinusoidal", sinusoidal_model(), [](double t) { return t + 0.5 * (1.0 - std::cos(t)); }},
  };

  auto ks = [&](std::vector<double> x, const std::function<double(double)>& H) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double F = std::isfinite(x[k]) ? 1.0 - std::exp(-H(x[k])) : 1.0;
      d = std::max({d, F - k / n, (k + 1) / n - F});
    }
    return d;
  };

  std::uint64_t stream = 0x8000;
  for (const Case& cs : cases) {
    std::vector<double> inversion(kSamples), thinning(kSamples);
    for (long k = 0; k < kSamples; ++k) {
      PhiloxStream a(opt.seed, stream + k);
      inversion[k] = sample_holding_time(cs.model.family, 0, 0.0, 1e3, a);
      PhiloxStream b(opt.seed, stream + kSamples + k);
      thinning[k] = sample_holding_time_thinning(cs.model.family, 0, 0.0, 1e3, b);
    }
    stream += 2 * kSamples;
    r.checks.push_back(make_check(cs.name + " KS, hazard inversion", ks(inversion, cs.hazard), critical));
    r.checks.push_back(make_check(cs.name + " KS, thinning", ks(thinning, cs.hazard), critical));

    const double K = cs.model.family.bound_K();
    for (double window : {0.01, 0.05, 0.1}) {
      long two_jumps = 0;
      for (long k = 0; k < kSamples; ++k) {
        PhiloxStream rng(opt.seed, stream + k);
        two_jumps += sample_path(cs.model, 0.0, 0, window, rng).jump_times.size() >= 2 ? 1 : 0;
      }
      stream += kSamples;
      const double p = static_cast<double>(two_jumps) / kSamples;
      const double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / kSamples) / kSamples);
      r.checks.push_back(make_check(cs.name + " P(second jump <= " + fmt("%g", window) + ")", p,
                                    K * K * window * window + 3.0 * se));
    }
  }
  return r;
}

CriterionResult support_preservation(const SuiteOptions&) {
  CriterionResult r{9, "support preservation", {}, 0.0};
  const double eta = 5.0, level = 1.0;
  GridParams params = grid(1e-3);
  params.s_max = 8.0;
  const std::vector<std::pair<std::string, FluidModel>> models = {{"constant", symmetric_model()},
                                                                   {"sinusoidal", sinusoidal_model()}};
  for (const auto& [name, model] : models) {
    const BoundaryFunction g = BoundaryFunction::exp_indicator(1.0, 0, eta);
    const GridFunction F = solve_passage(model, g, level, params);
    const StateTable J = extract_J(F);
    const StateTable P = extract_P(F);
    auto beyond = [&](const StateTable& t) {
      double worst = 0.0;
      for (int k = 0; k < t.size(); ++k) {
        if (t.s(k) >= eta) worst = std::max(worst, t.values.row(k).cwiseAbs().maxCoeff());
      }
      return worst;
    };
    double grid_worst = 0.0;
    for (int k = 0; k < F.stored_s; ++k) {
      if (k * F.s_stride * F.grid.ds < eta) continue;
      for (int i = 0; i < F.state_count; ++i) {
        for (int a = 0; a < F.stored_a; ++a) grid_worst = std::max(grid_worst, std::abs(F.stored(k, i, a)));
      }
    }
    r.checks.push_back(make_check(name + " max |J g| for s >= eta", beyond(J), 0.0));
    r.checks.push_back(make_check(name + " max |P g| for s >= eta", beyond(P), 0.0));
    r.checks.push_back(make_check(name + " max |F| on the grid for s >= eta", grid_worst, 0.0));
  }
  return r;
}

CriterionResult determinism(const SuiteOptions& opt) {
  CriterionResult r{10, "bitwise determinism", {}, 0.0};
  const FluidModel model = sinusoidal_model();
  const BoundaryFunction g = BoundaryFunction::exp_indicator(1.0, 0, 20.0);
  ExpectationQuery q;
  q.i0 = 1;
  q.level = 1.0;
  q.n = 20'000;
  q.seed = opt.seed;
  q.discount = 1.0;
  auto estimate_bits = [&](int threads) {
    const Estimate e = estimate_expectation(model, g, q, threads);
    return std::vector<double>{e.mean, e.std_error, e.censor_fraction, e.bias_bound};
  };
  const std::vector<double> one = estimate_bits(1);
  r.checks.push_back(make_check("MC repeat mismatches", static_cast<double>(mismatches(one, estimate_bits(1))), 0.0));
  r.checks.push_back(make_check("MC 1 vs 4 threads mismatches", static_cast<double>(mismatches(one, estimate_bits(4))), 0.0));
  r.checks.push_back(make_check("MC 1 vs 3 threads mismatches", static_cast<double>(mismatches(one, estimate_bits(3))), 0.0));

  const GridFunction a = solve_passage(model, g, 1.0, grid(4e-3));
  const GridFunction b = solve_passage(model, g, 1.0, grid(4e-3));
  const long pde = mismatches(a.values, b.values) + mismatches(a.level_row, b.level_row) +
                   mismatches(a.zero_row, b.zero_row);
  r.checks.push_back(make_check("PDE repeat mismatches", static_cast<double>(pde), 0.0));

  const FluidModel sym = symmetric_model();
  const HomogFactorization f1 = factorize(sym.family.eval(0.0), sym.space, 1.0);
  const HomogFactorization f2 = factorize(sym.family.eval(0.0), sym.space, 1.0);
  const long fact = mismatches(f1.Pi_plus, f2.Pi_plus) + mismatches(f1.Pi_minus, f2.Pi_minus) +
                    mismatches(f1.Q_plus, f2.Q_plus) + mismatches(f1.Q_minus, f2.Q_minus);
  r.checks.push_back(make_check("factorization repeat mismatches", static_cast<double>(fact), 0.0));
  return r;
}

}  // namespace

bool CriterionResult::pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"homog", "inhomog", "jumps", "identities"};
  return names;
}

std::vector<int> suite_criteria(const std::string& suite) {
  static const std::map<std::string, std::vector<int>> table = {
      {"homog", {1, 2, 4}}, {"inhomog", {3, 5, 10}}, {"jumps", {8}}, {"identities", {6, 7, 9}}};
  const auto it = table.find(suite);
  if (it == table.end()) throw Error(ErrorCode::ConfigError, "unknown suite '" + suite + "'");
  return it->second;
}

CriterionResult run_criterion(int id, const SuiteOptions& options) {
  using Runner = CriterionResult (*)(const SuiteOptions&);
  static const Runner runners[] = {factorization_battery, closed_form,           absorbing_chain,
                                   homogeneous_reduction, inhomogeneous_mc,      semigroup_composition,
                                   generator_identities,  jump_law,              support_preservation,
                                   determinism};
  if (id < 1 || id > 10) throw Error(ErrorCode::ConfigError, "criterion id must be in 1..10");
  const auto start = std::chrono::steady_clock::now();
  CriterionResult result = runners[id - 1](options);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<CriterionResult> run_suite(const std::string& suite, const SuiteOptions& options) {
  std::vector<CriterionResult> out;
  for (int id : suite_criteria(suite)) out.push_back(run_criterion(id, options));
  return out;
}

std::string format_report(const std::vector<CriterionResult>& results) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %-48s %14s %3s %14s  %s\n", "id", "check", "measured", "", "tolerance",
                "verdict");
  out += line;
  for (const CriterionResult& r : results) {
    for (const Check& c : r.checks) {
      const char* rel = c.relation == Relation::AtMost ? "<=" : c.relation == Relation::Below ? "<" : ">=";
      std::snprintf(line, sizeof line, "%-4d %-48s %14.6g %3s %14.6g  %s\n", r.id, c.label.c_str(), c.measured, rel,
                    c.tolerance, c.pass ? "pass" : "FAIL");
      out += line;
    }
    std::snprintf(line, sizeof line, "%-4d %-48s %s (%.1f s)\n", r.id, r.name.c_str(), r.pass() ? "PASS" : "FAIL",
                  r.seconds);
    out += line;
  }
  return out;
}

}  // namespace fluidhopf
