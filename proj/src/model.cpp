#include "fluidhopf/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fluidhopf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidRates: return "InvalidRates";
    case ErrorCode::InvalidGenerator: return "InvalidGenerator";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IntegrationError: return "IntegrationError";
    case ErrorCode::SpectralSplitError: return "SpectralSplitError";
    case ErrorCode::SubspaceDefect: return "SubspaceDefect";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::GridError: return "GridError";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DerivativeUnavailable: return "DerivativeUnavailable";
    case ErrorCode::HazardError: return "HazardError";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::NotConstantFamily: return "NotConstantFamily";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// StateSpace

StateSpace::StateSpace(std::vector<std::string> labels, std::vector<double> rates)
    : labels_(std::move(labels)), rates_(std::move(rates)) {
  if (labels_.empty()) {
    labels_.reserve(rates_.size());
    for (std::size_t i = 0; i < rates_.size(); ++i) labels_.push_back(std::to_string(i));
  }
  if (labels_.size() != rates_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "labels and rates differ in length");
  }
  if (rates_.size() < 2) throw Error(ErrorCode::InvalidRates, "at least two states are required");
  for (int i = 0; i < size(); ++i) {
    const double v = rates_[i];
    if (!std::isfinite(v) || v == 0.0) {
      throw Error(ErrorCode::InvalidRates, "rate of state '" + labels_[i] + "' must be finite and nonzero");
    }
    (v > 0.0 ? plus_ : minus_).push_back(i);
  }
  if (plus_.empty() || minus_.empty()) {
    throw Error(ErrorCode::InvalidRates, "both sign classes must be non-empty");
  }
  v_max_ = 0.0;
  v_min_ = std::abs(rates_[0]);
  for (double v : rates_) {
    v_max_ = std::max(v_max_, std::abs(v));
    v_min_ = std::min(v_min_, std::abs(v));
  }
}

std::vector<int> StateSpace::permutation() const {
  std::vector<int> p(plus_);
  p.insert(p.end(), minus_.begin(), minus_.end());
  return p;
}

int StateSpace::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
}

// ---------------------------------------------------------------------------
// GeneratorFamily

namespace {

void require_square(const Matrix& m, int n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << what << " is " << m.rows() << "x" << m.cols() << ", expected " << n << "x" << n;
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

void renormalize_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double sum = m.row(i).sum();
    if (sum != 0.0 && std::abs(sum) < 1e-12) {
      double off = 0.0;
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j != i) off += m(i, j);
      }
      m(i, i) = -off;
    }
  }
}

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

GeneratorFamily::GeneratorFamily(Params params, double bound_K)
    : params_(std::move(params)), bound_K_(bound_K) {
  if (!(bound_K_ > 0.0) || !std::isfinite(bound_K_)) {
    throw Error(ErrorCode::InvalidGenerator, "bound_K must be positive and finite");
  }
  std::visit(
      [this](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantGenerator>) {
          dimension_ = static_cast<int>(p.matrix.rows());
          require_square(p.matrix, dimension_, "constant generator");
        } else if constexpr (std::is_same_v<T, PiecewiseConstantGenerator>) {
          if (p.matrices.empty() || p.matrices.size() != p.breakpoints.size()) {
            throw Error(ErrorCode::DimensionMismatch, "piecewise generator needs one matrix per breakpoint");
          }
          if (p.breakpoints.front() != 0.0) {
            throw Error(ErrorCode::InvalidGenerator, "first breakpoint must be 0");
          }
          for (std::size_t k = 1; k < p.breakpoints.size(); ++k) {
            if (!(p.breakpoints[k] > p.breakpoints[k - 1])) {
              throw Error(ErrorCode::InvalidGenerator, "breakpoints must be strictly increasing");
            }
          }
          dimension_ = static_cast<int>(p.matrices.front().rows());
          for (const auto& m : p.matrices) require_square(m, dimension_, "piecewise generator piece");
        } else if constexpr (std::is_same_v<T, FourierPolynomialGenerator>) {
          dimension_ = static_cast<int>(p.base.rows());
          require_square(p.base, dimension_, "base generator");
          for (const auto& t : p.fourier) require_square(t.coefficient, dimension_, "fourier coefficient");
          for (const auto& t : p.polynomial) {
            require_square(t.coefficient, dimension_, "polynomial coefficient");
            if (t.degree < 0) throw Error(ErrorCode::InvalidGenerator, "polynomial degree must be >= 0");
          }
        } else {
          if (!p.evaluate) throw Error(ErrorCode::InvalidGenerator, "callback generator without evaluator");
          dimension_ = p.dimension;
        }
      },
      params_);
}

GeneratorFamily GeneratorFamily::constant(Matrix m, double bound_K) {
  return GeneratorFamily(ConstantGenerator{std::move(m)}, bound_K);
}

GeneratorKind GeneratorFamily::kind() const {
  return static_cast<GeneratorKind>(params_.index());
}

Matrix GeneratorFamily::eval(double s) const {
  Matrix out = std::visit(
      [s](const auto& p) -> Matrix {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantGenerator>) {
          return p.matrix;
        } else if constexpr (std::is_same_v<T, PiecewiseConstantGenerator>) {
          auto it = std::upper_bound(p.breakpoints.begin(), p.breakpoints.end(), s);
          const auto k = std::max<std::ptrdiff_t>(0, (it - p.breakpoints.begin()) - 1);
          return p.matrices[static_cast<std::size_t>(k)];
        } else if constexpr (std::is_same_v<T, FourierPolynomialGenerator>) {
          Matrix m = p.base;
          for (const auto& t : p.fourier) m += std::sin(t.omega * s + t.phase) * t.coefficient;
          for (const auto& t : p.polynomial) m += std::pow(s, t.degree) * t.coefficient;
          return m;
        } else {
          return p.evaluate(s);
        }
      },
      params_);
  if (out.rows() != dimension_ || out.cols() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch, "generator evaluation returned wrong shape");
  }
  renormalize_rows(out);
  return out;
}

double GeneratorFamily::raw_diagonal(int i, double s) const { return eval(s)(i, i); }

double GeneratorFamily::hazard_integral(int i, double s, double t) const {
  if (t <= s) return 0.0;
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantGenerator>) {
          return -p.matrix(i, i) * (t - s);
        } else if constexpr (std::is_same_v<T, PiecewiseConstantGenerator>) {
          double total = 0.0;
          const auto n = p.breakpoints.size();
          for (std::size_t k = 0; k < n; ++k) {
            const double lo = std::max(s, p.breakpoints[k]);
            const double hi = k + 1 < n ? std::min(t, p.breakpoints[k + 1]) : t;
            if (hi > lo) total += -p.matrices[k](i, i) * (hi - lo);
          }
          return total;
        } else if constexpr (std::is_same_v<T, FourierPolynomialGenerator>) {
          double total = -p.base(i, i) * (t - s);
          for (const auto& term : p.fourier) {
            const double w = term.omega == 0.0
                                 ? std::sin(term.phase) * (t - s)
                                 : (std::cos(term.omega * s + term.phase) -
                                    std::cos(term.omega * t + term.phase)) /
                                       term.omega;
            total += -term.coefficient(i, i) * w;
          }
          for (const auto& term : p.polynomial) {
            const int d = term.degree + 1;
            total += -term.coefficient(i, i) * (std::pow(t, d) - std::pow(s, d)) / d;
          }
          return total;
        } else {
          return adaptive_simpson([&](double u) { return -raw_diagonal(i, u); }, s, t,
                                  1e-12 * std::max(1.0, bound_K_ * (t - s)));
        }
      },
      params_);
}

// ---------------------------------------------------------------------------
// Blocks

BlockDecomposition block_decompose(const Matrix& matrix, const StateSpace& space) {
  const int m = space.size();
  if (matrix.rows() != m || matrix.cols() != m) {
    throw Error(ErrorCode::DimensionMismatch, "matrix does not match the state space");
  }
  const auto& P = space.plus();
  const auto& N = space.minus();
  BlockDecomposition b;
  b.A = matrix(P, P);
  b.B = matrix(P, N);
  b.C = matrix(N, P);
  b.D = matrix(N, N);
  return b;
}

Matrix reassemble(const BlockDecomposition& blocks, const StateSpace& space) {
  const int m = space.size();
  Matrix out(m, m);
  const auto& P = space.plus();
  const auto& N = space.minus();
  out(P, P) = blocks.A;
  out(P, N) = blocks.B;
  out(N, P) = blocks.C;
  out(N, N) = blocks.D;
  return out;
}

// ---------------------------------------------------------------------------
// Validation

void ValidationReport::throw_if_invalid() const {
  if (violations.empty()) return;
  const auto& v = violations.front();
  std::ostringstream os;
  os << v.message;
  if (violations.size() > 1) os << " (and " << violations.size() - 1 << " more)";
  throw Error(v.code, os.str());
}

ValidationReport validate_model(const StateSpace& space, const GeneratorFamily& family,
                                double check_resolution, double horizon) {
  if (!(check_resolution > 0.0)) {
    throw Error(ErrorCode::DomainError, "check_resolution must be positive");
  }
  ValidationReport report;
  report.assumption_relaxed = family.kind() == GeneratorKind::PiecewiseConstant;
  const int m = space.size();
  if (family.dimension() != m) {
    report.violations.push_back({ErrorCode::DimensionMismatch, 0.0, -1, -1,
                                 "generator dimension differs from the state space"});
    return report;
  }

  const double K = family.bound_K();
  auto check_at = [&](double s) {
    const Matrix L = family.eval(s);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double x = L(i, j);
        std::ostringstream os;
        if (!std::isfinite(x)) {
          os << "non-finite entry at s=" << s << " (" << i << "," << j << ")";
          report.violations.push_back({ErrorCode::InvalidGenerator, s, i, j, os.str()});
        } else if (i != j && x < 0.0) {
          os << "negative off-diagonal " << x << " at s=" << s << " (" << i << "," << j << ")";
          report.violations.push_back({ErrorCode::InvalidGenerator, s, i, j, os.str()});
        } else if (std::abs(x) > K * (1.0 + 1e-12)) {
          os << "entry " << x << " exceeds bound_K=" << K << " at s=" << s << " (" << i << "," << j << ")";
          report.violations.push_back({ErrorCode::InvalidGenerator, s, i, j, os.str()});
        }
      }
      const double sum = L.row(i).sum();
      if (std::abs(sum) > 1e-12) {
        std::ostringstream os;
        os << "row " << i << " sums to " << sum << " at s=" << s;
        report.violations.push_back({ErrorCode::InvalidGenerator, s, i, -1, os.str()});
      }
    }
  };

  if (family.is_constant()) {
    check_at(0.0);
    return report;
  }
  const auto steps = static_cast<long>(std::ceil(horizon / check_resolution));
  for (long k = 0; k <= steps; ++k) check_at(std::min(horizon, k * check_resolution));
  return report;
}

}  // namespace fluidhopf
