// fluidhopf: batch front end for the fluid passage solvers.
//
//   fluidhopf factorize --config model.json [--out DIR]
//   fluidhopf passage   --config model.json [--laplace] [--set passage.level=2]
//   fluidhopf simulate  --config model.json [--seed 7]
//   fluidhopf verify homog|inhomog|jumps|identities [--config model.json]
//
// Exit codes: 0 ok, 1 configuration error, 2 solver error, 3 verification failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "fluidhopf/config.hpp"
#include "fluidhopf/mc_oracle.hpp"
#include "fluidhopf/parallel.hpp"
#include "fluidhopf/queries.hpp"
#include "fluidhopf/verify.hpp"

namespace fs = std::filesystem;
using namespace fluidhopf;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kSolverError = 2;
constexpr int kVerifyFailure = 3;

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> ds;
  std::optional<double> da;
  bool laplace = false;
  std::string suite;
  std::optional<long> n_mc;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidRates:
    case ErrorCode::InvalidGenerator:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NotConstantFamily:
      return kConfigError;
    default:
      return kSolverError;
  }
}

Json load_document(const Options& opt) {
  Json doc = Json::object();
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + opt.config_path);
    try {
      doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::ConfigError, opt.config_path + ": " + e.what());
    }
  }
  std::vector<std::string> overrides = opt.overrides;
  if (opt.seed) overrides.push_back("numerics.seed=" + std::to_string(*opt.seed));
  if (opt.threads) overrides.push_back("numerics.threads=" + std::to_string(*opt.threads));
  if (opt.ds) overrides.push_back("numerics.ds=" + format_number(*opt.ds));
  if (opt.da) overrides.push_back("numerics.da=" + format_number(*opt.da));
  if (opt.laplace) overrides.push_back("passage.laplace=true");
  for (const auto& o : overrides) apply_override(doc, o);
  return doc;
}

/// Configured thread count, capped by FLUIDHOPF_THREADS when that is set.
int effective_threads(const NumericsSpec& numerics) {
  if (numerics.threads <= 0) return thread_count();
  if (std::getenv("FLUIDHOPF_THREADS")) return std::min(numerics.threads, thread_count());
  return numerics.threads;
}

struct Output {
  fs::path dir;
  std::string provenance;  // "# config_hash=... seed=..."

  std::ofstream open(const std::string& name) const {
    std::ofstream out(dir / name);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + (dir / name).string());
    return out;
  }

  void csv(const std::string& name, const std::string& header, const std::function<void(std::ostream&)>& rows) const {
    std::ofstream out = open(name);
    out << provenance << '\n' << header << '\n';
    rows(out);
  }

  void json(const std::string& name, const Json& doc) const { open(name) << dump_json(doc); }
};

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::string> labels_of(const StateSpace& space, const std::vector<int>& idx) {
  std::vector<std::string> out;
  for (int i : idx) out.push_back(space.labels()[i]);
  return out;
}

GridParams grid_params(const NumericsSpec& numerics) {
  GridParams p;
  p.ds = numerics.ds;
  p.da = numerics.da;
  p.max_stored_values = numerics.max_stored_values;
  return p;
}

void write_table(const Output& out, const std::string& name, const StateTable& t, const StateSpace& space) {
  out.csv(name, "s,state,value", [&](std::ostream& os) {
    for (int k = 0; k < t.size(); ++k) {
      for (std::size_t c = 0; c < t.states.size(); ++c) {
        os << format_number(t.s(k)) << ',' << space.labels()[t.states[c]] << ','
           << format_number(t.values(k, static_cast<Eigen::Index>(c))) << '\n';
      }
    }
  });
}

int run_factorize(const Config& cfg, const FluidModel& model, const Output& out) {
  if (!model.family.is_constant()) throw Error(ErrorCode::ConfigError, "factorize requires a constant generator");
  if (!cfg.factorize) throw Error(ErrorCode::ConfigError, "config has no 'factorize' section");
  const Matrix L = model.family.eval(0.0);
  const HomogFactorization f = factorize(L, model.space, cfg.factorize->c);
  Json doc{{"c", f.c},
           {"plus_states", labels_of(model.space, model.space.plus())},
           {"minus_states", labels_of(model.space, model.space.minus())},
           {"Pi_plus", matrix_json(f.Pi_plus)},
           {"Pi_minus", matrix_json(f.Pi_minus)},
           {"Q_plus", matrix_json(f.Q_plus)},
           {"Q_minus", matrix_json(f.Q_minus)},
           {"residual", f.residual},
           {"newton_iterations", f.newton_iterations},
           {"config_hash", config_hash(cfg)},
           {"seed", cfg.numerics.seed}};
  out.json("factorization.json", doc);
  std::cout << "residual " << format_number(f.residual) << "\n";
  return kOk;
}

int run_passage(const Config& cfg, const FluidModel& model, const Output& out) {
  if (!cfg.passage) throw Error(ErrorCode::ConfigError, "config has no 'passage' section");
  const PassageSpec& spec = *cfg.passage;
  const Sign sign = parse_sign(spec.sign);
  const StateSpace& space = model.space;
  const BoundaryFunction g = build_boundary(spec.boundary, space, sign);
  const GridParams params = grid_params(cfg.numerics);

  const GridFunction F = solve_passage_signed(model, g, spec.level, sign, params);
  out.csv("passage.csv", "s,state,a,value", [&](std::ostream& os) {
    for (int k = 0; k < F.stored_s; ++k) {
      const double s = F.grid.s(k * F.s_stride);
      for (int i = 0; i < F.state_count; ++i) {
        for (int a = 0; a < F.stored_a; ++a) {
          os << format_number(s) << ',' << space.labels()[i] << ',' << format_number(F.grid.a(a * F.a_stride)) << ','
             << format_number(F.stored(k, i, a)) << '\n';
        }
      }
    }
  });
  write_table(out, "P.csv", extract_P(F), space);

  // J and G come from the level-0 solve.
  const GridFunction F0 = spec.level == 0.0 ? F : solve_passage_signed(model, g, 0.0, sign, params);
  const StateTable J = extract_J(F0);
  write_table(out, "J.csv", J, space);
  if (g.smooth()) {
    write_table(out, "G.csv", apply_G(model, g, J, sign), space);
  } else {
    std::cerr << "boundary data is not differentiable; G.csv skipped\n";
  }

  const StateTable level_values = extract_level_values(F);
  for (int col = 0; col < static_cast<int>(level_values.states.size()); ++col) {
    std::cout << "F(0, " << space.labels()[level_values.states[col]] << ", 0) = "
              << format_number(level_values.values(0, col)) << "\n";
  }

  if (spec.laplace) {
    const double c = spec.c > 0.0 ? spec.c : spec.boundary.c;
    const LaplaceTable table = laplace_passage_table(model, c, spec.level, sign, params, spec.boundary.support);
    out.csv("laplace.csv", "s,from_state,to_state,value", [&](std::ostream& os) {
      for (int k = 0; k < table.s_count(); ++k) {
        for (int i = 0; i < space.size(); ++i) {
          for (std::size_t col = 0; col < table.to_states.size(); ++col) {
            os << format_number(k * table.ds) << ',' << space.labels()[i] << ','
               << space.labels()[table.to_states[col]] << ','
               << format_number(table.values[k](i, static_cast<Eigen::Index>(col))) << '\n';
          }
        }
      }
    });
  }
  return kOk;
}

int run_simulate(const Config& cfg, const FluidModel& model, const Output& out) {
  if (!cfg.simulate) throw Error(ErrorCode::ConfigError, "config has no 'simulate' section");
  const SimulateSpec& spec = *cfg.simulate;
  const Sign sign = parse_sign(spec.sign);
  const BoundaryFunction g = build_boundary(spec.boundary, model.space, sign);
  ExpectationQuery q;
  q.s0 = spec.s0;
  q.i0 = model.space.index_of(spec.start);
  if (q.i0 < 0) throw Error(ErrorCode::ConfigError, "unknown start state '" + spec.start + "'");
  q.level = spec.level;
  q.sign = sign;
  q.n = spec.n;
  q.horizon = spec.horizon;
  q.seed = cfg.numerics.seed;
  q.discount = spec.boundary.kind == "exp_indicator" ? spec.boundary.c : 0.0;
  const Estimate e = estimate_expectation(model, g, q, effective_threads(cfg.numerics));
  Json doc{{"mean", e.mean},
           {"stderr", e.std_error},
           {"n", e.n},
           {"censor_fraction", e.censor_fraction},
           {"bias_bound", e.bias_bound},
           {"seed", e.seed},
           {"config_hash", config_hash(cfg)}};
  out.json("estimate.json", doc);
  std::cout << "mean " << format_number(e.mean) << " std_error " << format_number(e.std_error) << "\n";
  return kOk;
}

int run_verify(const Options& opt) {
  suite_criteria(opt.suite);  // rejects unknown names before any work
  SuiteOptions suite;
  if (!opt.config_path.empty()) {
    const Config cfg = parse_config(load_document(opt));
    suite.seed = cfg.numerics.seed;
    suite.threads = effective_threads(cfg.numerics);
  } else {
    if (opt.seed) suite.seed = *opt.seed;
    if (opt.threads) suite.threads = *opt.threads;
  }
  if (opt.n_mc) suite.n_mc = *opt.n_mc;
  const std::vector<CriterionResult> results = run_suite(opt.suite, suite);
  std::cout << format_report(results);
  const bool ok = std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass(); });
  std::cout << "suite " << opt.suite << ": " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kOk : kVerifyFailure;
}

int dispatch(const std::string& command, const Options& opt) {
  if (command == "verify") return run_verify(opt);
  if (opt.config_path.empty()) throw Error(ErrorCode::ConfigError, command + " needs --config");
  const Config cfg = parse_config(load_document(opt));
  const FluidModel model = build_model(cfg.model);
  validate_model(model.space, model.family, cfg.numerics.check_resolution, cfg.numerics.horizon).throw_if_invalid();

  Output out;
  out.dir = opt.out_dir;
  std::error_code ec;
  fs::create_directories(out.dir, ec);
  if (ec) throw Error(ErrorCode::ConfigError, "cannot create " + out.dir.string());
  out.provenance = "# config_hash=" + config_hash(cfg) + " seed=" + std::to_string(cfg.numerics.seed);

  if (command == "factorize") return run_factorize(cfg, model, out);
  if (command == "passage") return run_passage(cfg, model, out);
  return run_simulate(cfg, model, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"First-passage functionals of Markov-modulated fluid processes"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", opt.config_path, "JSON config file");
    sub->add_option("--set", opt.overrides, "Override a config key, e.g. passage.level=2")->take_all();
    sub->add_option("-o,--out", opt.out_dir, "Output directory");
    sub->add_option("--seed", opt.seed, "Overrides numerics.seed");
    sub->add_option("--threads", opt.threads, "Overrides numerics.threads");
  };
  auto grid = [&](CLI::App* sub) {
    sub->add_option("--ds", opt.ds, "Overrides numerics.ds");
    sub->add_option("--da", opt.da, "Overrides numerics.da");
  };

  CLI::App* factorize_cmd = app.add_subcommand("factorize", "Wiener-Hopf factors of a constant generator");
  common(factorize_cmd);
  CLI::App* passage_cmd = app.add_subcommand("passage", "Solve the passage PDE and extract J, P and G");
  common(passage_cmd);
  grid(passage_cmd);
  passage_cmd->add_flag("--laplace", opt.laplace, "Also write the Laplace passage table");
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo passage estimate");
  common(simulate_cmd);
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run an acceptance suite");
  common(verify_cmd);
  verify_cmd->add_option("suite", opt.suite, "homog | inhomog | jumps | identities")->required();
  verify_cmd->add_option("--n", opt.n_mc, "Monte Carlo replicas per passage estimate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    return dispatch(app.get_subcommands().front()->get_name(), opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverError;
  }
}
