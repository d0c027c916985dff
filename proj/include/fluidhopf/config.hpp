#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluidhopf/homog_wh.hpp"
#include "fluidhopf/model.hpp"
#include "fluidhopf/passage_pde.hpp"

namespace fluidhopf {

using Json = nlohmann::json;

struct GeneratorSpec {
  std::string kind = "constant";  // constant | piecewise_constant | fourier_polynomial
  Matrix matrix;                   // constant
  std::vector<double> breakpoints;  // piecewise_constant
  std::vector<Matrix> matrices;     // piecewise_constant
  Matrix base;                      // fourier_polynomial
  std::vector<FourierTerm> fourier;
  std::vector<PolynomialTerm> polynomial;
};

struct ModelSpec {
  std::vector<std::string> states;
  std::vector<double> v;
  GeneratorSpec generator;
  double bound_K = 1.0;
};

struct NumericsSpec {
  double ds = 0.0;
  double da = 0.0;
  double horizon = 20.0;           // validation horizon for time-varying families
  double check_resolution = 1e-3;
  std::uint64_t seed = 1;
  int threads = 0;                 // 0: FLUIDHOPF_THREADS or hardware concurrency
  long max_stored_values = 200'000;  // size cap of the subsampled grid written to passage.csv
};

struct BoundarySpec {
  std::string kind = "exp_indicator";  // exp_indicator | indicator | table
  double c = 1.0;
  std::string target;                  // state label; empty for indicator means any hit state
  double support = 0.0;                // 0: 20 / c for exp_indicator
  double ds = 0.0;                     // table spacing
  std::vector<std::string> table_states;
  std::vector<std::vector<double>> table_values;  // one column per table state
};

struct FactorizeSpec {
  double c = 1.0;
};

struct PassageSpec {
  std::string sign = "plus";
  double level = 0.0;
  BoundarySpec boundary;
  bool laplace = false;
  double c = 0.0;  // Laplace discount; 0 takes the boundary's c
};

struct SimulateSpec {
  std::string sign = "plus";
  double level = 0.0;
  double s0 = 0.0;
  std::string start;
  BoundarySpec boundary;
  long n = 200'000;
  double horizon = 0.0;
};

struct Config {
  ModelSpec model;
  NumericsSpec numerics;
  std::optional<FactorizeSpec> factorize;
  std::optional<PassageSpec> passage;
  std::optional<SimulateSpec> simulate;
};

/// Strict parse: unknown keys, wrong types and missing required fields throw ConfigError.
Config parse_config(const Json& doc);
Json to_json(const Config& config);

/// Applies "a.b.c=value" overrides to a raw document; value is parsed as JSON,
/// falling back to a plain string.
void apply_override(Json& doc, const std::string& assignment);

/// FNV-1a of the canonical serialization, as 16 hex digits.
std::string config_hash(const Config& config);

FluidModel build_model(const ModelSpec& spec);
Sign parse_sign(const std::string& s);
BoundaryFunction build_boundary(const BoundarySpec& spec, const StateSpace& space, Sign sign);

/// JSON text with every floating-point number printed with 17 significant digits.
std::string dump_json(const Json& doc, int indent = 2);

/// "%.17g"
std::string format_number(double x);

}  // namespace fluidhopf
