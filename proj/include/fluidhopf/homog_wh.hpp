#pragma once

#include "fluidhopf/model.hpp"

namespace fluidhopf {

enum class Sign { Plus, Minus };

/// Wiener-Hopf factors of V^{-1}(Lambda - cI) for a constant generator.
///
/// Pi_plus is m- x m+ (entry (i,j): discounted probability that the level first
/// rises above its start in state j, starting from i in E-), Pi_minus is m+ x m-.
/// Q_plus and Q_minus are sub-Markovian generators on E+ and E- respectively.
/// With S = [[I+, Pi_minus], [Pi_plus, I-]] the factorization reads
///   V^{-1}(Lambda - cI) S = S diag(Q_plus, -Q_minus).
/// Rows and columns of every block follow the ascending index order of E+ and E-.
struct HomogFactorization {
  double c = 0.0;
  Matrix Pi_plus;
  Matrix Pi_minus;
  Matrix Q_plus;
  Matrix Q_minus;
  double residual = 0.0;
  int newton_iterations = 0;
};

/// Ordered Schur splitting of V^{-1}(Lambda - cI) followed by Newton refinement of
/// both Riccati equations.
///
/// Throws SpectralSplitError when the stable eigenvalue count is not m+ or an
/// eigenvalue sits within 1e-10 of the imaginary axis, SubspaceDefect when a basis
/// block has condition number above 1e12, and NoConvergence when the Riccati
/// residual stays above 1e-10.
HomogFactorization factorize(const Matrix& Lambda, const StateSpace& space, double c);

/// max |V^{-1}(Lambda - cI) S - S diag(Q+, -Q-)|.
double factorization_residual(const HomogFactorization& fact, const Matrix& Lambda,
                              const StateSpace& space);

/// Discounted passage matrix E[exp(-c tau) 1{X_tau = j}] for the level-`level` passage
/// of the given sign. `from_hit_class` selects start states in the class the
/// passage lands in (E+ for Sign::Plus): exp(level Q); otherwise Pi exp(level Q).
Matrix homog_passage_matrix(const HomogFactorization& fact, double level, Sign sign,
                            bool from_hit_class);

/// Scaling-and-squaring Pade exponential.
Matrix matrix_exponential(const Matrix& A);

}  // namespace fluidhopf
