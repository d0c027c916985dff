#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fluidhopf/error.hpp"

namespace fluidhopf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Finite state space with per-state fluid rates and the induced sign partition.
///
/// States with v(i) > 0 form E+, states with v(i) < 0 form E-. Both classes must
/// be non-empty and no rate may vanish; the constructor throws InvalidRates otherwise.
class StateSpace {
 public:
  StateSpace(std::vector<std::string> labels, std::vector<double> rates);

  int size() const { return static_cast<int>(rates_.size()); }
  int plus_size() const { return static_cast<int>(plus_.size()); }
  int minus_size() const { return static_cast<int>(minus_.size()); }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& rates() const { return rates_; }
  double rate(int i) const { return rates_[i]; }
  const std::vector<int>& plus() const { return plus_; }
  const std::vector<int>& minus() const { return minus_; }
  bool is_plus(int i) const { return rates_[i] > 0.0; }

  double v_max() const { return v_max_; }
  double v_min() const { return v_min_; }

  /// E+ indices followed by E- indices.
  std::vector<int> permutation() const;

  /// Index of `label`, or -1.
  int index_of(const std::string& label) const;

 private:
  std::vector<std::string> labels_;
  std::vector<double> rates_;
  std::vector<int> plus_;
  std::vector<int> minus_;
  double v_max_ = 0.0;
  double v_min_ = 0.0;
};

struct ConstantGenerator {
  Matrix matrix;
};

/// Right-continuous: on [breakpoints[k], breakpoints[k+1]) the value is matrices[k].
struct PiecewiseConstantGenerator {
  std::vector<double> breakpoints;  // breakpoints[0] == 0, strictly increasing
  std::vector<Matrix> matrices;
};

struct FourierTerm {
  Matrix coefficient;
  double omega = 1.0;
  double phase = 0.0;  // weight sin(omega * s + phase)
};

struct PolynomialTerm {
  Matrix coefficient;
  int degree = 1;  // weight s^degree
};

struct FourierPolynomialGenerator {
  Matrix base;
  std::vector<FourierTerm> fourier;
  std::vector<PolynomialTerm> polynomial;
};

/// Arbitrary library-supplied evaluation; not representable in config files.
struct CallbackGenerator {
  std::function<Matrix(double)> evaluate;
  int dimension = 0;
};

enum class GeneratorKind { Constant, PiecewiseConstant, FourierPolynomial, Callback };

/// The time-dependent generator s -> Lambda_s, immutable after construction.
class GeneratorFamily {
 public:
  using Params = std::variant<ConstantGenerator, PiecewiseConstantGenerator,
                              FourierPolynomialGenerator, CallbackGenerator>;

  GeneratorFamily(Params params, double bound_K);

  static GeneratorFamily constant(Matrix m, double bound_K);

  GeneratorKind kind() const;
  const Params& params() const { return params_; }
  double bound_K() const { return bound_K_; }
  int dimension() const { return dimension_; }
  bool is_constant() const { return kind() == GeneratorKind::Constant; }

  /// Lambda_s. Rows whose sum is below 1e-12 in magnitude are renormalized onto the diagonal.
  Matrix eval(double s) const;

  /// Integral of -Lambda_u(i,i) over [s, t]. Closed form for the parametric kinds,
  /// adaptive Simpson for callbacks.
  double hazard_integral(int i, double s, double t) const;

 private:
  double raw_diagonal(int i, double s) const;

  Params params_;
  double bound_K_;
  int dimension_ = 0;
};

inline Matrix eval_generator(const GeneratorFamily& family, double s) { return family.eval(s); }

struct FluidModel {
  StateSpace space;
  GeneratorFamily family;
};

struct BlockDecomposition {
  Matrix A;  // E+ x E+
  Matrix B;  // E+ x E-
  Matrix C;  // E- x E+
  Matrix D;  // E- x E-
};

BlockDecomposition block_decompose(const Matrix& matrix, const StateSpace& space);

/// Inverse of block_decompose in the original state ordering.
Matrix reassemble(const BlockDecomposition& blocks, const StateSpace& space);

struct Violation {
  ErrorCode code;
  double s = 0.0;
  int i = -1;
  int j = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool assumption_relaxed = false;  // piecewise-constant families are not continuous in s

  bool valid() const { return violations.empty(); }
  void throw_if_invalid() const;
};

/// Samples Lambda_s on [0, horizon] at the given resolution and reports every
/// structural violation (sign of off-diagonals, row sums, bound_K).
ValidationReport validate_model(const StateSpace& space, const GeneratorFamily& family,
                                double check_resolution = 1e-3, double horizon = 20.0);

}  // namespace fluidhopf
