#include "fluidhopf/homog_wh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <lapacke.h>
#include <unsupported/Eigen/MatrixFunctions>

namespace fluidhopf {

namespace {

lapack_logical select_stable(const double* re, const double* /*im*/) { return *re < 0.0; }
lapack_logical select_unstable(const double* re, const double* /*im*/) { return *re > 0.0; }

struct OrderedSchur {
  Matrix vectors;  // leading `selected` columns span the selected invariant subspace
  int selected = 0;
  Vector real_parts;
};

// dgees with eigenvalue sorting; complex conjugate pairs are moved as 2x2 blocks.
OrderedSchur ordered_schur(const Matrix& M, bool stable_first) {
  const auto n = static_cast<lapack_int>(M.rows());
  Matrix T = M;
  Matrix Z(n, n);
  Vector wr(n), wi(n);
  lapack_int sdim = 0;
  const lapack_int info =
      LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', stable_first ? select_stable : select_unstable, n,
                    T.data(), n, &sdim, wr.data(), wi.data(), Z.data(), n);
  if (info != 0) {
    std::ostringstream os;
    os << "dgees failed with info=" << info;
    throw Error(ErrorCode::SpectralSplitError, os.str());
  }
  return {std::move(Z), static_cast<int>(sdim), std::move(wr)};
}

double condition_number(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& sv = svd.singularValues();
  const double lo = sv(sv.size() - 1);
  return lo == 0.0 ? std::numeric_limits<double>::infinity() : sv(0) / lo;
}

// Solves X H + H Y = R for H via the Kronecker form; the blocks are small.
Matrix solve_sylvester(const Matrix& X, const Matrix& Y, const Matrix& R) {
  const auto p = X.rows();
  const auto q = Y.rows();
  Matrix K = Matrix::Zero(p * q, p * q);
  for (Eigen::Index col = 0; col < q; ++col) {
    K.block(col * p, col * p, p, p) += X;
    for (Eigen::Index k = 0; k < q; ++k) {
      K.block(k * p, col * p, p, p).diagonal().array() += Y(col, k);
    }
  }
  // vec(H Y) column `col` = sum_k H(:,k) Y(k,col); the loop above places Y(col,k) at
  // block (k, col), i.e. K = I kron X + Y^T kron I.
  const Eigen::Map<const Vector> rhs(R.data(), p * q);
  Vector h = K.partialPivLu().solve(rhs);
  return Eigen::Map<Matrix>(h.data(), p, q);
}

struct ScaledBlocks {
  Matrix A, B, C, D;  // rows scaled by 1/v, diagonal shifted by -c
};

ScaledBlocks scaled_blocks(const Matrix& Lambda, const StateSpace& space, double c) {
  BlockDecomposition b = block_decompose(Lambda, space);
  b.A.diagonal().array() -= c;
  b.D.diagonal().array() -= c;
  for (int r = 0; r < space.plus_size(); ++r) {
    const double inv = 1.0 / space.rate(space.plus()[r]);
    b.A.row(r) *= inv;
    b.B.row(r) *= inv;
  }
  for (int r = 0; r < space.minus_size(); ++r) {
    const double inv = 1.0 / space.rate(space.minus()[r]);
    b.C.row(r) *= inv;
    b.D.row(r) *= inv;
  }
  return {std::move(b.A), std::move(b.B), std::move(b.C), std::move(b.D)};
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void clean_rounding(Matrix& Pi) {
  for (Eigen::Index k = 0; k < Pi.size(); ++k) {
    if (Pi.data()[k] < 0.0 && Pi.data()[k] > -1e-14) Pi.data()[k] = 0.0;
  }
}

}  // namespace

Matrix matrix_exponential(const Matrix& A) { return A.exp(); }

HomogFactorization factorize(const Matrix& Lambda, const StateSpace& space, double c) {
  const int m = space.size();
  if (Lambda.rows() != m || Lambda.cols() != m) {
    throw Error(ErrorCode::DimensionMismatch, "generator does not match the state space");
  }
  if (!(c > 0.0)) throw Error(ErrorCode::DomainError, "kill rate c must be positive");
  const int mp = space.plus_size();
  const int mm = space.minus_size();

  const ScaledBlocks s = scaled_blocks(Lambda, space, c);
  Matrix M(m, m);
  M << s.A, s.B, s.C, s.D;

  const OrderedSchur stable = ordered_schur(M, true);
  for (Eigen::Index k = 0; k < stable.real_parts.size(); ++k) {
    if (std::abs(stable.real_parts(k)) < 1e-10) {
      throw Error(ErrorCode::SpectralSplitError, "eigenvalue on the imaginary axis");
    }
  }
  if (stable.selected != mp) {
    std::ostringstream os;
    os << stable.selected << " stable eigenvalues, expected " << mp;
    throw Error(ErrorCode::SpectralSplitError, os.str());
  }
  const OrderedSchur unstable = ordered_schur(M, false);
  if (unstable.selected != mm) {
    throw Error(ErrorCode::SpectralSplitError, "unstable subspace has the wrong dimension");
  }

  const Matrix W1 = stable.vectors.block(0, 0, mp, mp);
  const Matrix W2 = stable.vectors.block(mp, 0, mm, mp);
  const Matrix U1 = unstable.vectors.block(0, 0, mp, mm);
  const Matrix U2 = unstable.vectors.block(mp, 0, mm, mm);
  if (condition_number(W1) > 1e12 || condition_number(U2) > 1e12) {
    throw Error(ErrorCode::SubspaceDefect, "invariant subspace basis is numerically singular");
  }

  HomogFactorization f;
  f.c = c;
  // Pi+ = W2 W1^{-1}, Pi- = U1 U2^{-1}
  f.Pi_plus = W1.transpose().partialPivLu().solve(W2.transpose()).transpose();
  f.Pi_minus = U2.transpose().partialPivLu().solve(U1.transpose()).transpose();

  // Newton on
  //   R+(P) = P A + P B P - D P - C           (bottom rows of M [I; P] = [I; P] Q+)
  //   R-(P) = P C P + P D - A P - B           (top rows of M [P; I] = [P; I] (-Q-))
  auto residual_plus = [&](const Matrix& P) -> Matrix { return P * s.A + P * s.B * P - s.D * P - s.C; };
  auto residual_minus = [&](const Matrix& P) -> Matrix { return P * s.C * P + P * s.D - s.A * P - s.B; };

  constexpr double kTarget = 1e-13;
  constexpr int kMaxIterations = 50;
  int iterations = 0;
  double r_plus = max_abs(residual_plus(f.Pi_plus));
  double r_minus = max_abs(residual_minus(f.Pi_minus));
  for (; iterations < kMaxIterations && (r_plus > kTarget || r_minus > kTarget); ++iterations) {
    bool improved = false;
    if (r_plus > kTarget) {
      const Matrix& P = f.Pi_plus;
      const Matrix H = solve_sylvester(P * s.B - s.D, s.A + s.B * P, -residual_plus(P));
      const Matrix next = P + H;
      const double r = max_abs(residual_plus(next));
      if (r < r_plus) {
        f.Pi_plus = next;
        r_plus = r;
        improved = true;
      }
    }
    if (r_minus > kTarget) {
      const Matrix& P = f.Pi_minus;
      const Matrix H = solve_sylvester(P * s.C - s.A, s.C * P + s.D, -residual_minus(P));
      const Matrix next = P + H;
      const double r = max_abs(residual_minus(next));
      if (r < r_minus) {
        f.Pi_minus = next;
        r_minus = r;
        improved = true;
      }
    }
    if (!improved) break;
  }
  f.newton_iterations = iterations;
  if (r_plus > 1e-10 || r_minus > 1e-10) {
    std::ostringstream os;
    os << "Riccati residuals " << r_plus << ", " << r_minus << " after " << iterations << " iterations";
    throw Error(ErrorCode::NoConvergence, os.str());
  }
  clean_rounding(f.Pi_plus);
  clean_rounding(f.Pi_minus);

  f.Q_plus = s.A + s.B * f.Pi_plus;
  f.Q_minus = -(s.C * f.Pi_minus + s.D);
  f.residual = factorization_residual(f, Lambda, space);
  return f;
}

double factorization_residual(const HomogFactorization& fact, const Matrix& Lambda,
                              const StateSpace& space) {
  const int m = space.size();
  const int mp = space.plus_size();
  const int mm = space.minus_size();
  const ScaledBlocks s = scaled_blocks(Lambda, space, fact.c);
  Matrix M(m, m);
  M << s.A, s.B, s.C, s.D;
  Matrix S(m, m);
  S << Matrix::Identity(mp, mp), fact.Pi_minus, fact.Pi_plus, Matrix::Identity(mm, mm);
  Matrix Q = Matrix::Zero(m, m);
  Q.topLeftCorner(mp, mp) = fact.Q_plus;
  Q.bottomRightCorner(mm, mm) = -fact.Q_minus;
  return max_abs(M * S - S * Q);
}

Matrix homog_passage_matrix(const HomogFactorization& fact, double level, Sign sign,
                            bool from_hit_class) {
  if (!(level >= 0.0)) throw Error(ErrorCode::DomainError, "level must be nonnegative");
  const Matrix& Q = sign == Sign::Plus ? fact.Q_plus : fact.Q_minus;
  const Matrix& Pi = sign == Sign::Plus ? fact.Pi_plus : fact.Pi_minus;
  const Matrix E = matrix_exponential(level * Q);
  return from_hit_class ? E : Matrix(Pi * E);
}

}  // namespace fluidhopf
