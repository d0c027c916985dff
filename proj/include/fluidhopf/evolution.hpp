#pragma once

#include "fluidhopf/model.hpp"

namespace fluidhopf {

/// Transition matrix P(i,j) = P(X_t = j | X_s = i) of the time-inhomogeneous chain.
struct EvolutionMatrix {
  double s = 0.0;
  double t = 0.0;
  Matrix P;
};

/// Integrates dU/du = U * Lambda_u from U(s) = I to u = t with fixed-step RK4.
/// The last step is shortened to land on t. Rows are renormalized to sum one and
/// entries clamped to [0, 1]; a row-sum drift above 1e-6 throws IntegrationError.
EvolutionMatrix evolution_matrix(const GeneratorFamily& family, double s, double t, double step);

/// max |U_{s,t} - U_{s,r} U_{r,t}|.
double chapman_kolmogorov_residual(const GeneratorFamily& family, double s, double r, double t,
                                   double step);

}  // namespace fluidhopf
