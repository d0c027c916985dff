#include "fluidhopf/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fluidhopf {

EvolutionMatrix evolution_matrix(const GeneratorFamily& family, double s, double t, double step) {
  if (!(s >= 0.0) || !(t >= s)) throw Error(ErrorCode::DomainError, "require 0 <= s <= t");
  if (!(step > 0.0)) throw Error(ErrorCode::DomainError, "step must be positive");

  const int m = family.dimension();
  Matrix U = Matrix::Identity(m, m);
  const auto n_full = static_cast<long>(std::floor((t - s) / step));
  double u = s;
  auto advance = [&](double h) {
    const Matrix L0 = family.eval(u);
    const Matrix Lh = family.eval(u + 0.5 * h);
    const Matrix L1 = family.eval(u + h);
    const Matrix k1 = U * L0;
    const Matrix k2 = (U + 0.5 * h * k1) * Lh;
    const Matrix k3 = (U + 0.5 * h * k2) * Lh;
    const Matrix k4 = (U + h * k3) * L1;
    U += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  for (long k = 0; k < n_full; ++k) {
    advance(step);
    u = s + (k + 1) * step;
  }
  const double rest = t - u;
  if (rest > 1e-14 * std::max(1.0, t)) advance(rest);

  for (int i = 0; i < m; ++i) {
    const double sum = U.row(i).sum();
    if (!std::isfinite(sum) || std::abs(sum - 1.0) > 1e-6) {
      std::ostringstream os;
      os << "row " << i << " of U(" << s << "," << t << ") sums to " << sum;
      throw Error(ErrorCode::IntegrationError, os.str());
    }
    U.row(i) /= sum;
    for (int j = 0; j < m; ++j) U(i, j) = std::clamp(U(i, j), 0.0, 1.0);
  }
  return {s, t, std::move(U)};
}

double chapman_kolmogorov_residual(const GeneratorFamily& family, double s, double r, double t,
                                   double step) {
  if (!(s <= r && r <= t)) throw Error(ErrorCode::DomainError, "require s <= r <= t");
  const Matrix whole = evolution_matrix(family, s, t, step).P;
  const Matrix left = evolution_matrix(family, s, r, step).P;
  const Matrix right = evolution_matrix(family, r, t, step).P;
  return (whole - left * right).cwiseAbs().maxCoeff();
}

}  // namespace fluidhopf
