#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fluidhopf/homog_wh.hpp"
#include "fluidhopf/passage_pde.hpp"

namespace fluidhopf {

/// E[exp(-c (tau - s)) 1{X_tau = j} | X_s = i] on the s-grid, for every start state i
/// and every j in the hit class of `sign`.
struct LaplaceTable {
  double c = 0.0;
  double level = 0.0;
  Sign sign = Sign::Plus;
  double ds = 0.0;
  double support = 0.0;
  std::vector<int> to_states;
  std::vector<Matrix> values;  // values[k](i, col of j), i over all states

  int s_count() const { return static_cast<int>(values.size()); }
};

/// Default support bound of the truncated exp(-c s) boundary data: 20 / c.
inline double default_support(double c) { return 20.0 / c; }

/// One PDE solve per target state; each solve's output is divided by exp(-c s).
/// support <= 0 selects default_support(c).
LaplaceTable laplace_passage_table(const FluidModel& model, double c, double level, Sign sign,
                                   const GridParams& params = {}, double support = 0.0);

struct CrosscheckReport {
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<double> s_checked;
};

/// Compares laplace_passage_table with the matrix Wiener-Hopf passage matrices at
/// s-nodes where the truncation of the boundary data costs at most exp(-10).
/// Tolerance 10 (ds + da). Throws NotConstantFamily for time-varying generators.
CrosscheckReport homog_crosscheck(const FluidModel& model, double c, double level,
                                  const GridParams& params = {}, Sign sign = Sign::Plus);

enum class InversionTarget { Density, Cdf };

/// Transform arguments c_k = k ln2 / t, k = 1..order.
std::vector<double> gaver_stehfest_nodes(double t, int order = 12);

/// Gaver-Stehfest inversion of transform samples taken at gaver_stehfest_nodes(t, order).
/// For InversionTarget::Cdf the samples are divided by c_k before inversion.
/// Throws IllConditioned when the order and order-2 estimates differ by more than 10%.
double invert_laplace(std::span<const double> samples, double t,
                      InversionTarget target = InversionTarget::Density, int order = 12);

double invert_laplace(const std::function<double(double)>& transform, double t,
                      InversionTarget target = InversionTarget::Density, int order = 12);

}  // namespace fluidhopf
