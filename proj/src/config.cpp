#include "fluidhopf/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace fluidhopf {

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigError, where + ": " + what);
}

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) config_error(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) config_error(where, "unknown key '" + key + "'");
  }
}

double get_number(const Json& obj, const std::string& key, const std::string& where,
                  std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    config_error(where, "missing '" + key + "'");
  }
  const Json& v = obj.at(key);
  if (!v.is_number()) config_error(where + "." + key, "expected a number");
  return v.get<double>();
}

long get_integer(const Json& obj, const std::string& key, const std::string& where, long fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long>();
  if (v.is_number_float() && v.get<double>() == std::floor(v.get<double>())) {
    return static_cast<long>(v.get<double>());
  }
  config_error(where + "." + key, "expected an integer");
}

std::string get_string(const Json& obj, const std::string& key, const std::string& where,
                       std::optional<std::string> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    config_error(where, "missing '" + key + "'");
  }
  const Json& v = obj.at(key);
  if (!v.is_string()) config_error(where + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_vector(const Json& v, const std::string& where) {
  if (!v.is_array()) config_error(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) config_error(where, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Matrix get_matrix(const Json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) config_error(where, "expected a non-empty nested array");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Matrix m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::vector<double> row = get_vector(v[r], where);
    if (r == 0) m.resize(rows, static_cast<Eigen::Index>(row.size()));
    if (static_cast<Eigen::Index>(row.size()) != m.cols()) config_error(where, "ragged matrix");
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[c];
  }
  return m;
}

Json matrix_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

GeneratorSpec parse_generator(const Json& obj) {
  const std::string where = "model.generator";
  GeneratorSpec g;
  g.kind = get_string(obj, "kind", where);
  if (g.kind == "constant") {
    check_keys(obj, {"kind", "matrix"}, where);
    if (!obj.contains("matrix")) config_error(where, "missing 'matrix'");
    g.matrix = get_matrix(obj.at("matrix"), where + ".matrix");
  } else if (g.kind == "piecewise_constant") {
    check_keys(obj, {"kind", "breakpoints", "matrices"}, where);
    if (!obj.contains("breakpoints") || !obj.contains("matrices")) {
      config_error(where, "needs 'breakpoints' and 'matrices'");
    }
    g.breakpoints = get_vector(obj.at("breakpoints"), where + ".breakpoints");
    if (!obj.at("matrices").is_array()) config_error(where + ".matrices", "expected an array");
    for (const auto& m : obj.at("matrices")) g.matrices.push_back(get_matrix(m, where + ".matrices"));
  } else if (g.kind == "fourier_polynomial") {
    check_keys(obj, {"kind", "base", "fourier", "polynomial"}, where);
    if (!obj.contains("base")) config_error(where, "missing 'base'");
    g.base = get_matrix(obj.at("base"), where + ".base");
    if (obj.contains("fourier")) {
      for (const auto& t : obj.at("fourier")) {
        check_keys(t, {"coefficient", "omega", "phase"}, where + ".fourier");
        if (!t.contains("coefficient")) config_error(where + ".fourier", "missing 'coefficient'");
        g.fourier.push_back({get_matrix(t.at("coefficient"), where + ".fourier"),
                             get_number(t, "omega", where + ".fourier", 1.0),
                             get_number(t, "phase", where + ".fourier", 0.0)});
      }
    }
    if (obj.contains("polynomial")) {
      for (const auto& t : obj.at("polynomial")) {
        check_keys(t, {"coefficient", "degree"}, where + ".polynomial");
        if (!t.contains("coefficient")) config_error(where + ".polynomial", "missing 'coefficient'");
        g.polynomial.push_back({get_matrix(t.at("coefficient"), where + ".polynomial"),
                                static_cast<int>(get_integer(t, "degree", where + ".polynomial", 1))});
      }
    }
  } else {
    config_error(where, "unknown generator kind '" + g.kind + "'");
  }
  return g;
}

Json generator_json(const GeneratorSpec& g) {
  Json out{{"kind", g.kind}};
  if (g.kind == "constant") {
    out["matrix"] = matrix_json(g.matrix);
  } else if (g.kind == "piecewise_constant") {
    out["breakpoints"] = g.breakpoints;
    out["matrices"] = Json::array();
    for (const auto& m : g.matrices) out["matrices"].push_back(matrix_json(m));
  } else {
    out["base"] = matrix_json(g.base);
    out["fourier"] = Json::array();
    for (const auto& t : g.fourier) {
      out["fourier"].push_back({{"coefficient", matrix_json(t.coefficient)}, {"omega", t.omega}, {"phase", t.phase}});
    }
    out["polynomial"] = Json::array();
    for (const auto& t : g.polynomial) {
      out["polynomial"].push_back({{"coefficient", matrix_json(t.coefficient)}, {"degree", t.degree}});
    }
  }
  return out;
}

BoundarySpec parse_boundary(const Json& obj, const std::string& where) {
  BoundarySpec b;
  b.kind = get_string(obj, "kind", where);
  if (b.kind == "exp_indicator") {
    check_keys(obj, {"kind", "c", "target", "support"}, where);
    b.c = get_number(obj, "c", where);
    b.target = get_string(obj, "target", where);
    b.support = get_number(obj, "support", where, 0.0);
    if (!(b.c > 0.0)) config_error(where + ".c", "must be positive");
  } else if (b.kind == "indicator") {
    check_keys(obj, {"kind", "target", "support"}, where);
    b.target = get_string(obj, "target", where, std::string());
    b.support = get_number(obj, "support", where);
  } else if (b.kind == "table") {
    check_keys(obj, {"kind", "ds", "support", "states", "values"}, where);
    b.ds = get_number(obj, "ds", where);
    b.support = get_number(obj, "support", where);
    if (!obj.contains("states") || !obj.contains("values")) config_error(where, "needs 'states' and 'values'");
    for (const auto& s : obj.at("states")) {
      if (!s.is_string()) config_error(where + ".states", "expected labels");
      b.table_states.push_back(s.get<std::string>());
    }
    for (const auto& col : obj.at("values")) b.table_values.push_back(get_vector(col, where + ".values"));
    if (b.table_values.size() != b.table_states.size()) config_error(where, "one value column per state");
    if (!(b.ds > 0.0)) config_error(where + ".ds", "must be positive");
  } else {
    config_error(where, "unknown boundary kind '" + b.kind + "'");
  }
  return b;
}

Json boundary_json(const BoundarySpec& b) {
  Json out{{"kind", b.kind}, {"support", b.support}};
  if (b.kind == "exp_indicator") {
    out["c"] = b.c;
    out["target"] = b.target;
  } else if (b.kind == "indicator") {
    out["target"] = b.target;
  } else {
    out["ds"] = b.ds;
    out["states"] = b.table_states;
    out["values"] = b.table_values;
  }
  return out;
}

void check_sign(const std::string& s, const std::string& where) {
  if (s != "plus" && s != "minus") config_error(where, "sign must be 'plus' or 'minus'");
}

void append_json(std::string& out, const Json& v, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(key).dump() + ": ";
        append_json(out, item, indent, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case Json::value_t::array: {
      const bool flat = std::none_of(v.begin(), v.end(), [](const Json& x) { return x.is_structured(); });
      if (flat) {
        out += "[";
        for (std::size_t k = 0; k < v.size(); ++k) {
          if (k) out += ", ";
          append_json(out, v[k], indent, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ",\n";
        out += pad;
        append_json(out, v[k], indent, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_number(v.get<double>());
      return;
    default:
      out += v.dump();
  }
}

}  // namespace

std::string format_number(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "null" : (x > 0 ? "1e999" : "-1e999");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump_json(const Json& doc, int indent) {
  std::string out;
  append_json(out, doc, indent, 0);
  out += "\n";
  return out;
}

Config parse_config(const Json& doc) {
  check_keys(doc, {"model", "numerics", "factorize", "passage", "simulate"}, "config");
  Config cfg;
  if (!doc.contains("model")) config_error("config", "missing 'model'");
  const Json& model = doc.at("model");
  check_keys(model, {"states", "v", "generator", "bound_K"}, "model");
  if (!model.contains("v") || !model.contains("generator")) config_error("model", "needs 'v' and 'generator'");
  cfg.model.v = get_vector(model.at("v"), "model.v");
  if (model.contains("states")) {
    for (const auto& s : model.at("states")) {
      if (!s.is_string()) config_error("model.states", "expected labels");
      cfg.model.states.push_back(s.get<std::string>());
    }
  } else {
    for (std::size_t i = 0; i < cfg.model.v.size(); ++i) cfg.model.states.push_back(std::to_string(i));
  }
  cfg.model.generator = parse_generator(model.at("generator"));
  cfg.model.bound_K = get_number(model, "bound_K", "model");

  if (doc.contains("numerics")) {
    const Json& n = doc.at("numerics");
    check_keys(n, {"ds", "da", "horizon", "check_resolution", "seed", "threads", "max_stored_values"}, "numerics");
    cfg.numerics.ds = get_number(n, "ds", "numerics", 0.0);
    cfg.numerics.da = get_number(n, "da", "numerics", 0.0);
    cfg.numerics.horizon = get_number(n, "horizon", "numerics", 20.0);
    cfg.numerics.check_resolution = get_number(n, "check_resolution", "numerics", 1e-3);
    cfg.numerics.seed = static_cast<std::uint64_t>(get_integer(n, "seed", "numerics", 1));
    cfg.numerics.threads = static_cast<int>(get_integer(n, "threads", "numerics", 0));
    cfg.numerics.max_stored_values = get_integer(n, "max_stored_values", "numerics", 200'000);
    if (cfg.numerics.max_stored_values < 1) config_error("numerics.max_stored_values", "must be positive");
  }
  if (doc.contains("factorize")) {
    const Json& f = doc.at("factorize");
    check_keys(f, {"c"}, "factorize");
    cfg.factorize = FactorizeSpec{get_number(f, "c", "factorize")};
  }
  if (doc.contains("passage")) {
    const Json& p = doc.at("passage");
    check_keys(p, {"sign", "level", "boundary", "laplace", "c"}, "passage");
    PassageSpec spec;
    spec.sign = get_string(p, "sign", "passage", std::string("plus"));
    check_sign(spec.sign, "passage.sign");
    spec.level = get_number(p, "level", "passage");
    if (!p.contains("boundary")) config_error("passage", "missing 'boundary'");
    spec.boundary = parse_boundary(p.at("boundary"), "passage.boundary");
    if (p.contains("laplace")) {
      if (!p.at("laplace").is_boolean()) config_error("passage.laplace", "expected a boolean");
      spec.laplace = p.at("laplace").get<bool>();
    }
    spec.c = get_number(p, "c", "passage", 0.0);
    cfg.passage = spec;
  }
  if (doc.contains("simulate")) {
    const Json& s = doc.at("simulate");
    check_keys(s, {"sign", "level", "s0", "start", "boundary", "n", "horizon"}, "simulate");
    SimulateSpec spec;
    spec.sign = get_string(s, "sign", "simulate", std::string("plus"));
    check_sign(spec.sign, "simulate.sign");
    spec.level = get_number(s, "level", "simulate");
    spec.s0 = get_number(s, "s0", "simulate", 0.0);
    spec.start = get_string(s, "start", "simulate");
    if (!s.contains("boundary")) config_error("simulate", "missing 'boundary'");
    spec.boundary = parse_boundary(s.at("boundary"), "simulate.boundary");
    spec.n = get_integer(s, "n", "simulate", 200'000);
    spec.horizon = get_number(s, "horizon", "simulate", 0.0);
    cfg.simulate = spec;
  }
  return cfg;
}

Json to_json(const Config& cfg) {
  Json doc;
  doc["model"] = {{"states", cfg.model.states},
                  {"v", cfg.model.v},
                  {"generator", generator_json(cfg.model.generator)},
                  {"bound_K", cfg.model.bound_K}};
  doc["numerics"] = {{"ds", cfg.numerics.ds},
                     {"da", cfg.numerics.da},
                     {"horizon", cfg.numerics.horizon},
                     {"check_resolution", cfg.numerics.check_resolution},
                     {"seed", cfg.numerics.seed},
                     {"threads", cfg.numerics.threads},
                     {"max_stored_values", cfg.numerics.max_stored_values}};
  if (cfg.factorize) doc["factorize"] = {{"c", cfg.factorize->c}};
  if (cfg.passage) {
    doc["passage"] = {{"sign", cfg.passage->sign},
                      {"level", cfg.passage->level},
                      {"boundary", boundary_json(cfg.passage->boundary)},
                      {"laplace", cfg.passage->laplace},
                      {"c", cfg.passage->c}};
  }
  if (cfg.simulate) {
    doc["simulate"] = {{"sign", cfg.simulate->sign},
                       {"level", cfg.simulate->level},
                       {"s0", cfg.simulate->s0},
                       {"start", cfg.simulate->start},
                       {"boundary", boundary_json(cfg.simulate->boundary)},
                       {"n", cfg.simulate->n},
                       {"horizon", cfg.simulate->horizon}};
  }
  return doc;
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) config_error("--set", "expected key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &doc;
  std::istringstream parts(path);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(parts, key, '.')) keys.push_back(key);
  for (std::size_t k = 0; k + 1 < keys.size(); ++k) {
    if (!node->is_object()) config_error("--set " + path, "path crosses a non-object");
    node = &(*node)[keys[k]];
  }
  if (!node->is_object() && !node->is_null()) config_error("--set " + path, "path crosses a non-object");
  (*node)[keys.back()] = value;
}

std::string config_hash(const Config& config) {
  const std::string canonical = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FluidModel build_model(const ModelSpec& spec) {
  StateSpace space(spec.states, spec.v);
  const GeneratorSpec& g = spec.generator;
  GeneratorFamily::Params params;
  if (g.kind == "constant") {
    params = ConstantGenerator{g.matrix};
  } else if (g.kind == "piecewise_constant") {
    params = PiecewiseConstantGenerator{g.breakpoints, g.matrices};
  } else {
    params = FourierPolynomialGenerator{g.base, g.fourier, g.polynomial};
  }
  return FluidModel{std::move(space), GeneratorFamily(std::move(params), spec.bound_K)};
}

Sign parse_sign(const std::string& s) {
  check_sign(s, "sign");
  return s == "plus" ? Sign::Plus : Sign::Minus;
}

BoundaryFunction build_boundary(const BoundarySpec& spec, const StateSpace& space, Sign sign) {
  auto state_of = [&](const std::string& label) {
    const int idx = space.index_of(label);
    if (idx < 0) config_error("boundary", "unknown state '" + label + "'");
    const bool hit = sign == Sign::Plus ? space.is_plus(idx) : !space.is_plus(idx);
    if (!hit) config_error("boundary", "state '" + label + "' is not in the hit class");
    return idx;
  };
  if (spec.kind == "exp_indicator") {
    const double support = spec.support > 0.0 ? spec.support : 20.0 / spec.c;
    return BoundaryFunction::exp_indicator(spec.c, state_of(spec.target), support);
  }
  if (spec.kind == "indicator") {
    const int target = spec.target.empty() ? -1 : state_of(spec.target);
    auto one = [target](double, int i) { return target < 0 || i == target ? 1.0 : 0.0; };
    return BoundaryFunction(one, [](double, int) { return 0.0; }, spec.support, 1.0);
  }
  StateTable table;
  table.ds = spec.ds;
  std::size_t rows = 0;
  for (const auto& col : spec.table_values) rows = std::max(rows, col.size());
  table.values = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(spec.table_states.size()));
  for (std::size_t c = 0; c < spec.table_states.size(); ++c) {
    table.states.push_back(state_of(spec.table_states[c]));
    for (std::size_t r = 0; r < spec.table_values[c].size(); ++r) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = spec.table_values[c][r];
    }
  }
  return BoundaryFunction::table(std::move(table), spec.support);
}

}  // namespace fluidhopf
