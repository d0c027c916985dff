#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "fluidhopf/homog_wh.hpp"
#include "fluidhopf/model.hpp"

namespace fluidhopf {

/// Values on the uniform s-grid s_k = k * ds for a subset of states.
/// values(k, c) belongs to state `states[c]`.
struct StateTable {
  double ds = 0.0;
  std::vector<int> states;
  Matrix values;

  int size() const { return static_cast<int>(values.rows()); }
  double s(int k) const { return k * ds; }
  int column_of(int state) const;
  double max_abs() const { return values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff(); }
};

/// Boundary data g(s, i) for the states of one sign class, vanishing for s >= support.
class BoundaryFunction {
 public:
  using Fn = std::function<double(double, int)>;

  BoundaryFunction(Fn value, Fn derivative, double support, double sup_norm);

  /// exp(-c s) 1{i == target}, multiplied by a C^1 cutoff that is 1 on
  /// [0, support - w] and 0 from `support` on (w = min(1, support)).
  static BoundaryFunction exp_indicator(double c, int target, double support);

  /// Linear interpolation of a table; zero beyond the support and for states not
  /// in the table. Not differentiable.
  static BoundaryFunction table(StateTable table, double support);

  static BoundaryFunction zero(double support);

  double operator()(double s, int i) const { return s >= support_ ? 0.0 : value_(s, i); }
  double derivative(double s, int i) const;
  bool smooth() const { return static_cast<bool>(derivative_); }
  double support() const { return support_; }
  double sup_norm() const { return sup_norm_; }

 private:
  Fn value_;
  Fn derivative_;
  double support_;
  double sup_norm_;
};

/// C^1 cutoff used by exp_indicator: 1 on [0, support - w], smoothstep down to 0 at support.
double smooth_cutoff(double s, double support);
double smooth_cutoff_derivative(double s, double support);

struct GridParams {
  double ds = 0.0;    // 0 selects 1e-3 * max(1, support)
  double da = 0.0;    // 0 selects ds
  double s_max = 0.0;  // 0 selects the support bound
  double a_min = std::numeric_limits<double>::quiet_NaN();  // NaN selects level - v_max*support - 2 da
  long max_stored_values = 4'000'000;
};

/// s nodes k*ds, k < s_count; a nodes level - k*da, k < a_count (a decreasing in k).
struct Grid2D {
  double ds = 0.0;
  double da = 0.0;
  double s_max = 0.0;
  double a_min = 0.0;
  double level = 0.0;
  int s_count = 0;
  int a_count = 0;

  double s(int k) const { return k * ds; }
  double a(int k) const { return level - k * da; }
};

/// F(s, i, a) = E[g(tau, X_tau) | X_s = i, level process at a], tau the first time the
/// level exceeds `level` (Sign::Plus) or, mirrored, falls below -level (Sign::Minus).
///
/// The full grid is stored subsampled by (s_stride, a_stride); the rows a = level and
/// a = 0 are kept at full s resolution for every state.
struct GridFunction {
  Grid2D grid;
  Sign sign = Sign::Plus;
  std::vector<int> hit_states;    // E+ for Sign::Plus
  std::vector<int> other_states;  // E- for Sign::Plus
  int state_count = 0;

  int s_stride = 1;
  int a_stride = 1;
  int stored_s = 0;
  int stored_a = 0;
  std::vector<double> values;  // [stored s][state][stored a]

  Matrix level_row;  // (s node, state): F at a = level
  Matrix zero_row;   // (s node, state): F at a = 0

  double stored(int s_index, int state, int a_index) const {
    return values[(static_cast<std::size_t>(s_index) * state_count + state) * stored_a + a_index];
  }
};

GridFunction solve_passage(const FluidModel& model, const BoundaryFunction& g, double level,
                           const GridParams& params = {});

GridFunction solve_passage_minus(const FluidModel& model, const BoundaryFunction& g, double level,
                                 const GridParams& params = {});

/// Shared implementation of both signs.
GridFunction solve_passage_signed(const FluidModel& model, const BoundaryFunction& g, double level,
                                  Sign sign, const GridParams& params = {});

/// J g on the non-hit class: F at a = level.
StateTable extract_J(const GridFunction& F);

/// P_level g on the hit class: F at a = 0.
StateTable extract_P(const GridFunction& F);

/// F at a = 0 for every state (hit class: P_level g, other class: J P_level g).
StateTable extract_level_values(const GridFunction& F);

/// G g(s, i) = (1/w_i) (dg/ds + sum_{hit} Lambda(i,j) g(s,j) + sum_{other} Lambda(i,j) Jg(s,j)),
/// w = v for Sign::Plus and -v for Sign::Minus. Requires a differentiable g.
StateTable apply_G(const FluidModel& model, const BoundaryFunction& g, const StateTable& J_values,
                   Sign sign = Sign::Plus);

struct IdentityResidual {
  StateTable residual;  // interior s nodes carry values, the two end nodes are zero
  double max_norm = 0.0;
};

/// Central-difference d/ds(J g) minus (-C g - D Jg + W J(Gg)) on the non-hit class.
/// `JG_values` is extract_J of a solve whose boundary data is G g.
IdentityResidual check_identity_whd(const FluidModel& model, const BoundaryFunction& g,
                                    const StateTable& J_values, const StateTable& JG_values,
                                    Sign sign = Sign::Plus);

/// Runs the solves for g and G g and returns the identity residual.
IdentityResidual identity_whd_residual(const FluidModel& model, const BoundaryFunction& g,
                                       const GridParams& params, Sign sign = Sign::Plus);

struct ModulusCheck {
  double worst_ratio = 0.0;  // max over neighbour pairs of |dF| / bound
  bool within = true;
};

/// Compares neighbour differences of the stored grid against
/// (2K|g|/v_min) da + 4(1 + v_max/v_min) K |g| ds + w_g(da/v_min) + 3 w_g(v_max ds/v_min)
/// plus `slack`. w_g is the modulus of continuity of g sampled on the s-grid.
ModulusCheck check_modulus(const FluidModel& model, const BoundaryFunction& g, const GridFunction& F,
                           double slack);

}  // namespace fluidhopf
