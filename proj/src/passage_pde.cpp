#include "fluidhopf/passage_pde.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace fluidhopf {

// ---------------------------------------------------------------------------
// Tables and boundary data

int StateTable::column_of(int state) const {
  auto it = std::find(states.begin(), states.end(), state);
  return it == states.end() ? -1 : static_cast<int>(it - states.begin());
}

namespace {

double taper_width(double support) { return std::min(1.0, support); }

double table_value(const StateTable& t, double s, int state) {
  const int col = t.column_of(state);
  if (col < 0 || s < 0.0 || t.size() == 0) return 0.0;
  const double x = s / t.ds;
  const auto k = static_cast<int>(std::floor(x));
  if (k >= t.size() - 1) return k == t.size() - 1 && x == k ? t.values(k, col) : 0.0;
  const double fr = x - k;
  return (1.0 - fr) * t.values(k, col) + fr * t.values(k + 1, col);
}

}  // namespace

double smooth_cutoff(double s, double support) {
  const double w = taper_width(support);
  if (s >= support) return 0.0;
  if (s <= support - w) return 1.0;
  const double x = (s - (support - w)) / w;
  return 1.0 - x * x * (3.0 - 2.0 * x);
}

double smooth_cutoff_derivative(double s, double support) {
  const double w = taper_width(support);
  if (s >= support || s <= support - w) return 0.0;
  const double x = (s - (support - w)) / w;
  return -6.0 * x * (1.0 - x) / w;
}

BoundaryFunction::BoundaryFunction(Fn value, Fn derivative, double support, double sup_norm)
    : value_(std::move(value)), derivative_(std::move(derivative)), support_(support), sup_norm_(sup_norm) {
  if (!(support_ > 0.0) || !std::isfinite(support_)) {
    throw Error(ErrorCode::DomainError, "boundary support bound must be positive and finite");
  }
}

BoundaryFunction BoundaryFunction::exp_indicator(double c, int target, double support) {
  auto value = [c, target, support](double s, int i) {
    return i == target ? std::exp(-c * s) * smooth_cutoff(s, support) : 0.0;
  };
  auto derivative = [c, target, support](double s, int i) {
    if (i != target) return 0.0;
    const double e = std::exp(-c * s);
    return -c * e * smooth_cutoff(s, support) + e * smooth_cutoff_derivative(s, support);
  };
  return BoundaryFunction(value, derivative, support, 1.0);
}

BoundaryFunction BoundaryFunction::table(StateTable table, double support) {
  const double norm = table.max_abs();
  auto shared = std::make_shared<const StateTable>(std::move(table));
  return BoundaryFunction([shared](double s, int i) { return table_value(*shared, s, i); }, nullptr,
                          support, norm);
}

BoundaryFunction BoundaryFunction::zero(double support) {
  auto z = [](double, int) { return 0.0; };
  return BoundaryFunction(z, z, support, 0.0);
}

double BoundaryFunction::derivative(double s, int i) const {
  if (!derivative_) {
    throw Error(ErrorCode::DerivativeUnavailable, "boundary function is not differentiable");
  }
  return s >= support_ ? 0.0 : derivative_(s, i);
}

// ---------------------------------------------------------------------------
// Solver

GridFunction solve_passage(const FluidModel& model, const BoundaryFunction& g, double level,
                           const GridParams& params) {
  return solve_passage_signed(model, g, level, Sign::Plus, params);
}

GridFunction solve_passage_minus(const FluidModel& model, const BoundaryFunction& g, double level,
                                 const GridParams& params) {
  return solve_passage_signed(model, g, level, Sign::Minus, params);
}

GridFunction solve_passage_signed(const FluidModel& model, const BoundaryFunction& g, double level,
                                  Sign sign, const GridParams& params) {
  const StateSpace& space = model.space;
  const int m = space.size();
  if (model.family.dimension() != m) {
    throw Error(ErrorCode::DimensionMismatch, "generator does not match the state space");
  }
  if (!(level >= 0.0) || !std::isfinite(level)) throw Error(ErrorCode::DomainError, "level must be >= 0");

  const double eta = g.support();
  const double v_max = space.v_max();
  Grid2D grid;
  grid.level = level;
  grid.ds = params.ds > 0.0 ? params.ds : 1e-3 * std::max(1.0, eta);
  grid.da = params.da > 0.0 ? params.da : grid.ds;
  grid.s_max = params.s_max > 0.0 ? params.s_max : eta;
  grid.a_min = std::isnan(params.a_min) ? level - v_max * eta - 2.0 * grid.da : params.a_min;

  if (grid.s_max < eta) throw Error(ErrorCode::DomainError, "s_max must cover the support of g");
  if (!(grid.a_min < level)) throw Error(ErrorCode::DomainError, "a_min must lie below the level");
  if (grid.a_min > level - v_max * eta) {
    std::ostringstream os;
    os << "a_min=" << grid.a_min << " does not reach level - v_max*eta=" << level - v_max * eta;
    throw Error(ErrorCode::DomainError, os.str());
  }
  if (v_max * grid.ds > level - grid.a_min) {
    throw Error(ErrorCode::GridError, "one s-step crosses the whole a-domain");
  }
  if (grid.ds * model.family.bound_K() > 1.0) {
    throw Error(ErrorCode::GridError, "ds * bound_K must not exceed 1");
  }
  grid.s_count = static_cast<int>(std::ceil(grid.s_max / grid.ds - 1e-9)) + 1;
  grid.a_count = static_cast<int>(std::ceil((level - grid.a_min) / grid.da - 1e-9)) + 1;

  GridFunction F;
  F.grid = grid;
  F.sign = sign;
  F.state_count = m;
  const double orient = sign == Sign::Plus ? 1.0 : -1.0;
  std::vector<double> w(m);
  for (int i = 0; i < m; ++i) {
    w[i] = orient * space.rate(i);
    (w[i] > 0.0 ? F.hit_states : F.other_states).push_back(i);
  }

  const double total = static_cast<double>(grid.s_count) * m * grid.a_count;
  const double budget = static_cast<double>(std::max<long>(params.max_stored_values, 1));
  const int stride = total > budget ? static_cast<int>(std::ceil(std::sqrt(total / budget))) : 1;
  F.s_stride = stride;
  F.a_stride = stride;
  F.stored_s = (grid.s_count - 1) / stride + 1;
  F.stored_a = (grid.a_count - 1) / stride + 1;
  F.values.assign(static_cast<std::size_t>(F.stored_s) * m * F.stored_a, 0.0);
  F.level_row = Matrix::Zero(grid.s_count, m);
  F.zero_row = Matrix::Zero(grid.s_count, m);

  // A characteristic of state i moves by -w_i ds / da in the index k (k = 0 is the level).
  std::vector<int> base(m);
  std::vector<double> frac(m);
  int pad = 2;
  for (int i = 0; i < m; ++i) {
    const double off = -w[i] * grid.ds / grid.da;
    base[i] = static_cast<int>(std::floor(off));
    frac[i] = off - base[i];
    pad = std::max(pad, std::abs(base[i]) + 2);
  }
  const int width = grid.a_count + pad;
  std::vector<double> next(static_cast<std::size_t>(m) * width, 0.0);
  std::vector<double> cur(next.size(), 0.0);
  auto row = [width](std::vector<double>& buf, int i) { return buf.data() + static_cast<std::size_t>(i) * width; };

  const double k_level = level / grid.da;
  const auto k_level0 = static_cast<int>(std::floor(k_level));
  const double k_level_frac = k_level - k_level0;

  for (int n = grid.s_count - 1; n >= 0; --n) {
    const double s = grid.s(n);
    std::fill(cur.begin(), cur.end(), 0.0);
    const double reach = v_max * std::max(0.0, eta - s) / grid.da;
    const int k_last = std::min(grid.a_count - 1, static_cast<int>(std::floor(reach)));

    if (n == grid.s_count - 1) {
      for (int i : F.hit_states) row(cur, i)[0] = g(s, i);
    } else {
      const Matrix L = model.family.eval(s);
      for (int i = 0; i < m; ++i) {
        double* out = row(cur, i);
        int k_first = 0;
        if (w[i] > 0.0) {
          // Crossing within this step: hit at s + theta, coupling frozen at the level.
          const int k_cross = std::min(k_last, static_cast<int>(std::floor(w[i] * grid.ds / grid.da)));
          for (int k = 0; k <= k_cross; ++k) {
            const double theta = k * grid.da / w[i];
            double v = (1.0 + theta * L(i, i)) * g(s + theta, i);
            for (int j = 0; j < m; ++j) {
              if (j != i) v += theta * L(i, j) * row(next, j)[0];
            }
            out[k] = v;
          }
          k_first = k_cross + 1;
        }
        if (k_first > k_last) continue;
        const int b = base[i];
        const double fr = frac[i];
        for (int j = 0; j < m; ++j) {
          const double weight = j == i ? 1.0 + grid.ds * L(i, i) : grid.ds * L(i, j);
          if (weight == 0.0) continue;
          const double* src = row(next, j);
          const double w0 = weight * (1.0 - fr);
          const double w1 = weight * fr;
          for (int k = k_first; k <= k_last; ++k) out[k] += w0 * src[k + b] + w1 * src[k + b + 1];
        }
      }
    }

    for (int i = 0; i < m; ++i) {
      const double* r = row(cur, i);
      F.level_row(n, i) = r[0];
      F.zero_row(n, i) = k_level_frac == 0.0
                             ? r[k_level0]
                             : (1.0 - k_level_frac) * r[k_level0] + k_level_frac * r[k_level0 + 1];
    }
    if (n % stride == 0) {
      const int sn = n / stride;
      for (int i = 0; i < m; ++i) {
        const double* r = row(cur, i);
        double* dst = F.values.data() + (static_cast<std::size_t>(sn) * m + i) * F.stored_a;
        for (int ka = 0; ka < F.stored_a; ++ka) dst[ka] = r[ka * stride];
      }
    }
    std::swap(cur, next);
  }
  return F;
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

StateTable column_table(const Grid2D& grid, const Matrix& rows, const std::vector<int>& states) {
  StateTable t;
  t.ds = grid.ds;
  t.states = states;
  t.values.resize(grid.s_count, static_cast<Eigen::Index>(states.size()));
  for (std::size_t c = 0; c < states.size(); ++c) t.values.col(c) = rows.col(states[c]);
  return t;
}

std::vector<int> all_states(int m) {
  std::vector<int> s(m);
  for (int i = 0; i < m; ++i) s[i] = i;
  return s;
}

}  // namespace

StateTable extract_J(const GridFunction& F) { return column_table(F.grid, F.level_row, F.other_states); }

StateTable extract_P(const GridFunction& F) { return column_table(F.grid, F.zero_row, F.hit_states); }

StateTable extract_level_values(const GridFunction& F) {
  return column_table(F.grid, F.zero_row, all_states(F.state_count));
}

StateTable apply_G(const FluidModel& model, const BoundaryFunction& g, const StateTable& J_values,
                   Sign sign) {
  if (!g.smooth()) {
    throw Error(ErrorCode::DerivativeUnavailable, "G requires a continuously differentiable g");
  }
  const StateSpace& space = model.space;
  const double orient = sign == Sign::Plus ? 1.0 : -1.0;
  std::vector<int> hit;
  std::vector<int> other;
  for (int i = 0; i < space.size(); ++i) (orient * space.rate(i) > 0.0 ? hit : other).push_back(i);
  for (int j : other) {
    if (J_values.column_of(j) < 0) throw Error(ErrorCode::DimensionMismatch, "J table misses a state");
  }

  StateTable out;
  out.ds = J_values.ds;
  out.states = hit;
  out.values = Matrix::Zero(J_values.size(), static_cast<Eigen::Index>(hit.size()));
  for (int k = 0; k < J_values.size(); ++k) {
    const double s = J_values.s(k);
    const Matrix L = model.family.eval(s);
    for (std::size_t c = 0; c < hit.size(); ++c) {
      const int i = hit[c];
      double v = g.derivative(s, i);
      for (int j : hit) v += L(i, j) * g(s, j);
      for (int j : other) v += L(i, j) * J_values.values(k, J_values.column_of(j));
      out.values(k, static_cast<Eigen::Index>(c)) = v / (orient * space.rate(i));
    }
  }
  return out;
}

IdentityResidual check_identity_whd(const FluidModel& model, const BoundaryFunction& g,
                                    const StateTable& J_values, const StateTable& JG_values,
                                    Sign sign) {
  if (J_values.size() != JG_values.size() || J_values.ds != JG_values.ds ||
      J_values.states != JG_values.states) {
    throw Error(ErrorCode::DimensionMismatch, "J g and J(G g) tables are not aligned");
  }
  const StateSpace& space = model.space;
  const double orient = sign == Sign::Plus ? 1.0 : -1.0;
  std::vector<int> hit;
  for (int i = 0; i < space.size(); ++i) {
    if (orient * space.rate(i) > 0.0) hit.push_back(i);
  }

  IdentityResidual res;
  res.residual.ds = J_values.ds;
  res.residual.states = J_values.states;
  res.residual.values = Matrix::Zero(J_values.size(), J_values.values.cols());
  const double ds = J_values.ds;
  for (int k = 1; k + 1 < J_values.size(); ++k) {
    const double s = J_values.s(k);
    const Matrix L = model.family.eval(s);
    for (std::size_t c = 0; c < J_values.states.size(); ++c) {
      const int i = J_values.states[c];
      const auto col = static_cast<Eigen::Index>(c);
      const double dJ = (J_values.values(k + 1, col) - J_values.values(k - 1, col)) / (2.0 * ds);
      double rhs = orient * space.rate(i) * JG_values.values(k, col);
      for (int j : hit) rhs -= L(i, j) * g(s, j);
      for (std::size_t d = 0; d < J_values.states.size(); ++d) {
        rhs -= L(i, J_values.states[d]) * J_values.values(k, static_cast<Eigen::Index>(d));
      }
      const double r = dJ - rhs;
      res.residual.values(k, col) = r;
      res.max_norm = std::max(res.max_norm, std::abs(r));
    }
  }
  return res;
}

IdentityResidual identity_whd_residual(const FluidModel& model, const BoundaryFunction& g,
                                       const GridParams& params, Sign sign) {
  // J does not depend on the level; level 0 gives the smallest domain.
  const GridFunction F = solve_passage_signed(model, g, 0.0, sign, params);
  const StateTable J = extract_J(F);
  const StateTable G = apply_G(model, g, J, sign);
  const BoundaryFunction g_of_G = BoundaryFunction::table(G, g.support());
  const GridFunction FG = solve_passage_signed(model, g_of_G, 0.0, sign, params);
  return check_identity_whd(model, g, J, extract_J(FG), sign);
}

// ---------------------------------------------------------------------------
// Modulus of continuity

ModulusCheck check_modulus(const FluidModel& model, const BoundaryFunction& g, const GridFunction& F,
                           double slack) {
  const StateSpace& space = model.space;
  const double K = model.family.bound_K();
  const double norm = g.sup_norm();
  const double v_lo = space.v_min();
  const double v_hi = space.v_max();

  std::vector<int> hit = F.hit_states;
  auto modulus_g = [&](double delta) {
    if (delta <= 0.0) return 0.0;
    const double h = delta / 8.0;
    double worst = 0.0;
    for (double t = 0.0; t < g.support(); t += h) {
      for (int q = 1; q <= 8; ++q) {
        for (int i : hit) worst = std::max(worst, std::abs(g(t + q * h, i) - g(t, i)));
      }
    }
    return worst;
  };

  const double dS = F.s_stride * F.grid.ds;
  const double dA = F.a_stride * F.grid.da;
  const double bound_a = 2.0 * K * norm / v_lo * dA + modulus_g(dA / v_lo) + slack;
  const double bound_s =
      4.0 * (1.0 + v_hi / v_lo) * K * norm * dS + 3.0 * modulus_g(v_hi / v_lo * dS) + slack;

  ModulusCheck out;
  for (int sn = 0; sn < F.stored_s; ++sn) {
    for (int i = 0; i < F.state_count; ++i) {
      for (int ka = 0; ka < F.stored_a; ++ka) {
        const double here = F.stored(sn, i, ka);
        if (ka + 1 < F.stored_a) {
          out.worst_ratio = std::max(out.worst_ratio, std::abs(F.stored(sn, i, ka + 1) - here) / bound_a);
        }
        if (sn + 1 < F.stored_s) {
          out.worst_ratio = std::max(out.worst_ratio, std::abs(F.stored(sn + 1, i, ka) - here) / bound_s);
        }
      }
    }
  }
  out.within = out.worst_ratio <= 1.0;
  return out;
}

}  // namespace fluidhopf
