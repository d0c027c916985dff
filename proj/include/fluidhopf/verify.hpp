#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fluidhopf {

/// measured <= tolerance, measured < tolerance, or measured >= tolerance (convergence ratios).
enum class Relation { AtMost, Below, AtLeast };

/// One measured quantity compared against its tolerance.
struct Check {
  std::string label;
  double measured = 0.0;
  double tolerance = 0.0;
  Relation relation = Relation::AtMost;
  bool pass = false;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool pass() const;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  long n_mc = 200'000;  // replicas for the passage estimates
  int threads = 0;      // 0: FLUIDHOPF_THREADS or hardware concurrency
};

/// homog, inhomog, jumps, identities
const std::vector<std::string>& suite_names();

/// Criterion ids of a suite; throws ConfigError for unknown names.
std::vector<int> suite_criteria(const std::string& suite);

CriterionResult run_criterion(int id, const SuiteOptions& options = {});

std::vector<CriterionResult> run_suite(const std::string& suite, const SuiteOptions& options = {});

/// Table with one row per check: criterion, label, measured, relation, tolerance, verdict.
std::string format_report(const std::vector<CriterionResult>& results);

}  // namespace fluidhopf
