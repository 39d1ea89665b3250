#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavemc/expr.hpp"

namespace wavemc {

class DomainSpec;

// The data function f(z, x): entire in z, defined for x in the closure of
// the domain, together with its z-derivative. Built either from an
// expression (derivative generated symbolically) or from callbacks (the
// caller supplies the derivative). Either way, construction cross-checks
// df/dz against the Cauchy-integral numerical derivative at random probe
// points and rejects mismatches.
class DataFunction {
 public:
  using EvalFn = std::function<Complex(Complex, std::span<const double>)>;

  // Inert placeholder; assign from one of the factories before use.
  DataFunction() = default;

  static DataFunction from_expression(Expr f, int dim);
  static DataFunction from_expression(Expr f, Expr df_dz, int dim);
  static DataFunction from_text(std::string_view f_text, int dim);
  static DataFunction from_callbacks(EvalFn f, EvalFn df_dz, int dim);

  Complex eval(Complex z, std::span<const double> x) const { return f_(z, x); }
  Complex eval_dz(Complex z, std::span<const double> x) const { return df_dz_(z, x); }

  int dim() const noexcept { return dim_; }

  // Present only for expression-backed functions.
  const std::optional<Expr>& f_expr() const noexcept { return f_ast_; }
  const std::optional<Expr>& df_dz_expr() const noexcept { return df_ast_; }

  // Result of the construction-time probe f(conj z, x) == conj f(z, x).
  bool reflection_symmetric() const noexcept { return reflection_symmetric_; }

  // True when a division node has a z-dependent denominator, in which case
  // entirety in z is not guaranteed and a warning should reach the user.
  bool entirety_warning() const noexcept { return entirety_warning_; }

 private:
  void validate_derivative() const;
  void probe_reflection_symmetry();

  EvalFn f_, df_dz_;
  std::optional<Expr> f_ast_, df_ast_;
  int dim_ = 1;
  bool reflection_symmetric_ = false;
  bool entirety_warning_ = false;
};

// Builds f1(z,x) = f(z,x) + z*phi(x), which keeps the initial position
// f(0,x) and shifts the initial velocity by phi(x). phi must not reference
// z. When a domain is supplied, phi is probed at sampled boundary points;
// a non-vanishing phi appends a warning instead of failing (the added
// velocity only has the advertised meaning if phi vanishes on the
// boundary).
DataFunction augment_velocity(const DataFunction& f, const Expr& phi,
                              const DomainSpec* dom = nullptr,
                              std::vector<std::string>* warnings = nullptr);

// Probes f(conj z, x) == conj f(z, x) at 100 random (z, x) with x drawn
// from the domain's bounding box. True for expressions with real
// coefficients; the exact-realness guarantee of antithetic estimation
// applies only when this holds.
bool check_reflection_symmetry(const DataFunction& f, const DomainSpec& dom);

}  // namespace wavemc
