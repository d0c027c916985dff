#include "fluidhopf/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fluidhopf/parallel.hpp"

namespace fluidhopf {

double PathSample::time(std::size_t k) const {
  if (k == 0) return s0;
  if (k <= jump_times.size()) return jump_times[k - 1];
  return horizon;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void hazard_error(int i, double t, double rate) {
  std::ostringstream os;
  os << "negative jump rate " << rate << " in state " << i << " at t=" << t;
  throw Error(ErrorCode::HazardError, os.str());
}

}  // namespace

double sample_holding_time(const GeneratorFamily& family, int i, double t, double horizon,
                           PhiloxStream& rng) {
  const double target = rng.exponential();
  if (family.is_constant()) {
    const double q = -std::get<ConstantGenerator>(family.params()).matrix(i, i);
    if (q < -1e-12) hazard_error(i, t, q);
    if (q <= 0.0) return kInf;
    const double jump = t + target / q;
    return jump < horizon ? jump : kInf;
  }
  const double total = family.hazard_integral(i, t, horizon);
  if (total < -1e-12) hazard_error(i, t, total);
  if (total < target) return kInf;
  double lo = t;
  double hi = horizon;
  while (hi - lo > 1e-10 * std::max(1.0, std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    const double h = family.hazard_integral(i, t, mid);
    if (h < -1e-12) hazard_error(i, mid, h);
    (h >= target ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double sample_holding_time_thinning(const GeneratorFamily& family, int i, double t, double horizon,
                                    PhiloxStream& rng) {
  const double K = family.bound_K();
  double u = t;
  for (;;) {
    u += rng.exponential() / K;
    if (u >= horizon) return kInf;
    const double rate = -family.eval(u)(i, i);
    if (rate < -1e-12) hazard_error(i, u, rate);
    if (rng.uniform() * K < rate) return u;
  }
}

int sample_destination(const GeneratorFamily& family, int i, double t, PhiloxStream& rng) {
  const Matrix L = family.eval(t);
  if (-L(i, i) < -1e-12) hazard_error(i, t, -L(i, i));
  double total = 0.0;
  for (int j = 0; j < L.cols(); ++j) {
    if (j != i) total += L(i, j);
  }
  if (!(total > 0.0)) hazard_error(i, t, total);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  int last = -1;
  for (int j = 0; j < L.cols(); ++j) {
    if (j == i || L(i, j) <= 0.0) continue;
    acc += L(i, j);
    last = j;
    if (u < acc) return j;
  }
  return last;
}

PathSample sample_path(const FluidModel& model, double s0, int i0, double horizon, PhiloxStream& rng) {
  if (!(horizon > s0) || !(s0 >= 0.0)) throw Error(ErrorCode::DomainError, "require horizon > s0 >= 0");
  PathSample path;
  path.s0 = s0;
  path.i0 = i0;
  path.horizon = horizon;
  path.states.push_back(i0);
  path.phi.push_back(0.0);
  double t = s0;
  int i = i0;
  for (;;) {
    const double jump = sample_holding_time(model.family, i, t, horizon, rng);
    const double end = std::min(jump, horizon);
    path.phi.push_back(path.phi.back() + model.space.rate(i) * (end - t));
    if (jump == kInf) break;
    i = sample_destination(model.family, i, jump, rng);
    path.jump_times.push_back(jump);
    path.states.push_back(i);
    t = jump;
  }
  return path;
}

PassageSample passage_functional(const PathSample& path, const StateSpace& space, double level,
                                 Sign sign) {
  const double orient = sign == Sign::Plus ? 1.0 : -1.0;
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    const double t0 = path.time(k);
    const double p0 = orient * path.phi[k];
    const double p1 = orient * path.phi[k + 1];
    const double w = orient * space.rate(path.states[k]);
    if (w > 0.0 && p1 > level) {
      return {std::max(t0, t0 + (level - p0) / w), path.states[k], false};
    }
  }
  return {};
}

PassageSample simulate_passage(const FluidModel& model, double s0, int i0, double level, Sign sign,
                               double horizon, PhiloxStream& rng) {
  const double orient = sign == Sign::Plus ? 1.0 : -1.0;
  double t = s0;
  int i = i0;
  double phi = 0.0;
  for (;;) {
    const double jump = sample_holding_time(model.family, i, t, horizon, rng);
    const double end = std::min(jump, horizon);
    const double w = orient * model.space.rate(i);
    if (w > 0.0 && phi + w * (end - t) > level) {
      return {std::max(t, t + (level - phi) / w), i, false};
    }
    if (jump == kInf) return {};
    phi += w * (jump - t);
    i = sample_destination(model.family, i, jump, rng);
    t = jump;
  }
}

double default_horizon(const FluidModel& model, const BoundaryFunction& g, double level) {
  return g.support() + 20.0 * std::max(level, 1.0) / model.space.v_min();
}

Estimate estimate_expectation(const FluidModel& model, const BoundaryFunction& g,
                              const ExpectationQuery& query, int threads) {
  if (query.n < 2) throw Error(ErrorCode::DomainError, "need at least two replicas");
  if (query.i0 < 0 || query.i0 >= model.space.size()) {
    throw Error(ErrorCode::DomainError, "start state out of range");
  }
  const double horizon =
      query.horizon > 0.0 ? query.horizon : std::max(query.s0, 0.0) + default_horizon(model, g, query.level);
  if (!(horizon > query.s0)) throw Error(ErrorCode::DomainError, "horizon must exceed s0");

  std::vector<double> values(static_cast<std::size_t>(query.n));
  std::vector<char> censored(values.size());
  parallel_for(
      query.n,
      [&](long r) {
        PhiloxStream rng(query.seed, static_cast<std::uint64_t>(r));
        const PassageSample p =
            simulate_passage(model, query.s0, query.i0, query.level, query.sign, horizon, rng);
        censored[r] = p.censored;
        values[r] = p.censored ? 0.0 : g(p.tau, p.hit_state);
      },
      threads > 0 ? threads : thread_count());

  Estimate est;
  est.n = query.n;
  est.seed = query.seed;
  double sum = 0.0;
  long n_censored = 0;
  for (std::size_t r = 0; r < values.size(); ++r) {
    sum += values[r];
    n_censored += censored[r];
  }
  est.mean = sum / static_cast<double>(query.n);
  double ss = 0.0;
  for (double x : values) ss += (x - est.mean) * (x - est.mean);
  est.std_error = std::sqrt(ss / static_cast<double>(query.n - 1) / static_cast<double>(query.n));
  est.censor_fraction = static_cast<double>(n_censored) / static_cast<double>(query.n);
  if (horizon < g.support()) {
    est.bias_bound = g.sup_norm() * (query.discount > 0.0 ? std::exp(-query.discount * horizon) : 1.0);
  }
  return est;
}

}  // namespace fluidhopf
