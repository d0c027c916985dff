#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "fluidhopf/homog_wh.hpp"
#include "fluidhopf/model.hpp"
#include "fluidhopf/passage_pde.hpp"
#include "fluidhopf/rng.hpp"

namespace fluidhopf {

/// One trajectory on [s0, horizon]. phi has one entry per breakpoint time
/// (s0, each jump, horizon) and starts at 0; states[k] is in force on
/// [time(k), time(k+1)).
struct PathSample {
  double s0 = 0.0;
  int i0 = 0;
  double horizon = 0.0;
  std::vector<double> jump_times;
  std::vector<int> states;
  std::vector<double> phi;

  double time(std::size_t k) const;
};

inline constexpr int kCoffin = -1;

struct PassageSample {
  double tau = std::numeric_limits<double>::infinity();
  int hit_state = kCoffin;
  bool censored = true;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
  double censor_fraction = 0.0;
  double bias_bound = 0.0;
  std::uint64_t seed = 0;
};

/// Next jump time after t from state i by inverting the cumulative hazard against an
/// Exp(1) draw; +infinity if no jump occurs before `horizon`.
double sample_holding_time(const GeneratorFamily& family, int i, double t, double horizon,
                           PhiloxStream& rng);

/// Independent sampler by thinning with majorant bound_K. Same law as sample_holding_time.
double sample_holding_time_thinning(const GeneratorFamily& family, int i, double t, double horizon,
                                    PhiloxStream& rng);

/// Jump destination j != i with probability Lambda_t(i,j) / -Lambda_t(i,i).
int sample_destination(const GeneratorFamily& family, int i, double t, PhiloxStream& rng);

PathSample sample_path(const FluidModel& model, double s0, int i0, double horizon, PhiloxStream& rng);

/// First passage of the level process above `level` (Sign::Plus) or below -level.
PassageSample passage_functional(const PathSample& path, const StateSpace& space, double level,
                                 Sign sign);

/// Simulates only until the passage or the horizon; same law as
/// passage_functional(sample_path(...)).
PassageSample simulate_passage(const FluidModel& model, double s0, int i0, double level, Sign sign,
                               double horizon, PhiloxStream& rng);

struct ExpectationQuery {
  double s0 = 0.0;
  int i0 = 0;
  double level = 0.0;
  Sign sign = Sign::Plus;
  long n = 200'000;
  double horizon = 0.0;  // 0 selects support(g) + 20 max(level, 1) / v_min
  std::uint64_t seed = 1;
  double discount = 0.0;  // c of a discounted g, used only for bias_bound
};

double default_horizon(const FluidModel& model, const BoundaryFunction& g, double level);

/// Mean of g(tau, X_tau) over n replicas, censored replicas contributing 0.
/// Replica r draws from PhiloxStream(seed, r); the reduction runs in replica order,
/// so the result does not depend on the thread count.
Estimate estimate_expectation(const FluidModel& model, const BoundaryFunction& g,
                              const ExpectationQuery& query, int threads = 0);

}  // namespace fluidhopf
