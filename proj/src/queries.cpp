#include "fluidhopf/queries.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fluidhopf/parallel.hpp"

namespace fluidhopf {

LaplaceTable laplace_passage_table(const FluidModel& model, double c, double level, Sign sign,
                                   const GridParams& params, double support) {
  if (!(c > 0.0)) throw Error(ErrorCode::DomainError, "discount c must be positive");
  const double eta = support > 0.0 ? support : default_support(c);
  const StateSpace& space = model.space;
  const int m = space.size();

  LaplaceTable table;
  table.c = c;
  table.level = level;
  table.sign = sign;
  table.support = eta;
  table.to_states = sign == Sign::Plus ? space.plus() : space.minus();

  const auto targets = static_cast<long>(table.to_states.size());
  std::vector<StateTable> columns(static_cast<std::size_t>(targets));
  parallel_for(targets, [&](long col) {
    const BoundaryFunction g = BoundaryFunction::exp_indicator(c, table.to_states[col], eta);
    columns[col] = extract_level_values(solve_passage_signed(model, g, level, sign, params));
  });

  table.ds = columns.front().ds;
  const int n = columns.front().size();
  table.values.assign(n, Matrix::Zero(m, targets));
  for (int k = 0; k < n; ++k) {
    const double scale = std::exp(c * table.ds * k);
    for (long col = 0; col < targets; ++col) {
      for (int i = 0; i < m; ++i) {
        const double v = columns[col].values(k, i);
        table.values[k](i, col) = v == 0.0 ? 0.0 : v * scale;
      }
    }
  }
  return table;
}

CrosscheckReport homog_crosscheck(const FluidModel& model, double c, double level,
                                  const GridParams& params, Sign sign) {
  if (!model.family.is_constant()) {
    throw Error(ErrorCode::NotConstantFamily, "cross-check needs a constant generator");
  }
  const StateSpace& space = model.space;
  const Matrix Lambda = model.family.eval(0.0);
  const HomogFactorization fact = factorize(Lambda, space, c);
  const Matrix from_hit = homog_passage_matrix(fact, level, sign, true);
  const Matrix from_other = homog_passage_matrix(fact, level, sign, false);
  const std::vector<int>& hit = sign == Sign::Plus ? space.plus() : space.minus();
  const std::vector<int>& other = sign == Sign::Plus ? space.minus() : space.plus();

  const LaplaceTable table = laplace_passage_table(model, c, level, sign, params);
  const double da = params.da > 0.0 ? params.da : table.ds;

  CrosscheckReport report;
  report.tolerance = 10.0 * (table.ds + da);
  const double s_hi = std::max(0.0, table.support - 1.0 - 10.0 / c);
  constexpr int kNodes = 5;
  for (int q = 0; q < kNodes; ++q) {
    const int k = std::min(table.s_count() - 1,
                           static_cast<int>(std::floor(s_hi * q / (kNodes - 1) / table.ds)));
    if (!report.s_checked.empty() && report.s_checked.back() == k * table.ds) continue;
    report.s_checked.push_back(k * table.ds);
    const Matrix& V = table.values[k];
    for (std::size_t r = 0; r < hit.size(); ++r) {
      for (Eigen::Index col = 0; col < V.cols(); ++col) {
        report.max_deviation =
            std::max(report.max_deviation, std::abs(V(hit[r], col) - from_hit(static_cast<Eigen::Index>(r), col)));
      }
    }
    for (std::size_t r = 0; r < other.size(); ++r) {
      for (Eigen::Index col = 0; col < V.cols(); ++col) {
        report.max_deviation = std::max(
            report.max_deviation, std::abs(V(other[r], col) - from_other(static_cast<Eigen::Index>(r), col)));
      }
    }
  }
  report.pass = report.max_deviation <= report.tolerance;
  return report;
}

// ---------------------------------------------------------------------------
// Gaver-Stehfest

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

std::vector<double> stehfest_weights(int order) {
  const int half = order / 2;
  std::vector<double> V(order + 1, 0.0);
  for (int k = 1; k <= order; ++k) {
    double sum = 0.0;
    for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
      sum += std::pow(j, half) * factorial(2 * j) /
             (factorial(half - j) * factorial(j) * factorial(j - 1) * factorial(k - j) * factorial(2 * j - k));
    }
    V[k] = ((k + half) % 2 == 0 ? 1.0 : -1.0) * sum;
  }
  return V;
}

double stehfest_sum(std::span<const double> samples, double t, InversionTarget target, int order) {
  const std::vector<double> V = stehfest_weights(order);
  const double ln2 = std::numbers::ln2;
  double acc = 0.0;
  for (int k = 1; k <= order; ++k) {
    double f = samples[k - 1];
    if (target == InversionTarget::Cdf) f /= k * ln2 / t;
    acc += V[k] * f;
  }
  return acc * ln2 / t;
}

}  // namespace

std::vector<double> gaver_stehfest_nodes(double t, int order) {
  if (!(t > 0.0)) throw Error(ErrorCode::DomainError, "inversion time must be positive");
  std::vector<double> c(order);
  for (int k = 1; k <= order; ++k) c[k - 1] = k * std::numbers::ln2 / t;
  return c;
}

double invert_laplace(std::span<const double> samples, double t, InversionTarget target, int order) {
  if (order < 8 || order % 2 != 0) throw Error(ErrorCode::DomainError, "order must be even and >= 8");
  if (static_cast<int>(samples.size()) < order) {
    throw Error(ErrorCode::DomainError, "not enough transform samples for the requested order");
  }
  if (!(t > 0.0)) throw Error(ErrorCode::DomainError, "inversion time must be positive");
  const double full = stehfest_sum(samples, t, target, order);
  const double lower = stehfest_sum(samples, t, target, order - 2);
  const double gap = std::abs(full - lower);
  if (gap > 1e-12 && gap > 0.1 * std::abs(full)) {
    std::ostringstream os;
    os << "order " << order << " gives " << full << ", order " << order - 2 << " gives " << lower;
    throw Error(ErrorCode::IllConditioned, os.str());
  }
  return full;
}

double invert_laplace(const std::function<double(double)>& transform, double t, InversionTarget target,
                      int order) {
  const std::vector<double> nodes = gaver_stehfest_nodes(t, order);
  std::vector<double> samples(nodes.size());
  std::transform(nodes.begin(), nodes.end(), samples.begin(), transform);
  return invert_laplace(samples, t, target, order);
}

}  // namespace fluidhopf
