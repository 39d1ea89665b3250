#pragma once

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "wavemc/errors.hpp"

namespace wavemc {

using Complex = std::complex<double>;

// Abstract syntax of the data-function language: complex constants
// (decimal literals, i, pi), the variables z and x1..xd, binary + - * /,
// integer powers via ^, unary minus, and the entire functions
// exp, sin, cos, sinh, cosh. No branch-cut functions: log, sqrt and
// non-integer powers would break holomorphy on all of C, so they are
// not part of the language.
enum class ExprKind {
  constant,
  var_z,
  var_x,
  add,
  sub,
  mul,
  div,
  pow_int,
  neg,
  fn_exp,
  fn_sin,
  fn_cos,
  fn_sinh,
  fn_cosh,
};

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind;
  Complex value{};    // constant
  int index = 0;      // var_x: 0-based component; pow_int: exponent
  ExprNodePtr a, b;   // children (a only for unary)
  int pos = 0;        // 1-based source column, 0 for synthetic nodes
};

// Immutable value-semantic expression tree. Trees share subtrees freely.
class Expr {
 public:
  Expr() = default;

  static Expr constant(Complex c);
  static Expr constant(double c) { return constant(Complex(c, 0.0)); }
  static Expr z();
  static Expr x(int index);  // 0-based: x(0) is the source-level "x1"

  bool valid() const noexcept { return root_ != nullptr; }
  const ExprNodePtr& node() const noexcept { return root_; }
  ExprKind kind() const { return root_->kind; }

  Complex eval(Complex z, std::span<const double> x) const;

  // Symbolic d/dz with x-variables held constant; result is simplified.
  Expr differentiate_z() const;

  // Constant folding plus identity elimination (e+0, 1*e, e^1, ...).
  Expr simplified() const;

  // Replace every occurrence of z by `replacement`.
  Expr substitute_z(const Expr& replacement) const;

  bool contains_z() const;
  int max_x_index() const;  // -1 when no x variable occurs

  // True when some division node has a z-dependent denominator; such an
  // expression is not guaranteed entire in z and deserves a warning.
  bool divides_by_z() const;

  // True when any constant has a nonzero imaginary part (e.g. uses i).
  bool has_complex_constants() const;

  // Parseable text form; parse_expr(to_string(e)) evaluates identically
  // and, for trees built by parse_expr, reproduces the tree exactly.
  std::string to_string() const;

  // Structural equality (exact constants, same shape).
  friend bool operator==(const Expr& lhs, const Expr& rhs);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, int exponent);
  friend Expr exp(const Expr& a);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr sinh(const Expr& a);
  friend Expr cosh(const Expr& a);

  explicit Expr(ExprNodePtr root) : root_(std::move(root)) {}

 private:
  ExprNodePtr root_;
};

// Parses `text` against variables z and x1..x{dim}. Throws ParseError with
// a 1-based position on malformed input, unknown identifiers, or a
// non-integer exponent after '^'.
Expr parse_expr(std::string_view text, int dim);

// As parse_expr, but rejects z and complex constants: the sub-language for
// drift/diffusion coefficients and for the velocity augmentation phi.
Expr parse_real_expr(std::string_view text, int dim);

// Numerical holomorphic derivative by the trapezoid rule on a circle of
// radius rho: f'(z) ~ (1/m) sum_k f(z + rho e^{i th_k}, x) e^{-i th_k} / rho.
// Spectrally accurate when f is entire on the closed disk.
Complex cauchy_derivative(const Expr& e, Complex z, std::span<const double> x,
                          double rho = 1e-2, int m = 32);

}  // namespace wavemc
