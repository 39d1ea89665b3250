#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wavemc/domain.hpp"
#include "wavemc/expr.hpp"

namespace wavemc {

// Fixed-step Euler-Maruyama discretization parameters. When max_steps is
// left at 0 the effective cap is min(1e8 / h, 1e9): generous enough that a
// truncated path signals degenerate dynamics rather than a tight budget.
struct StepConfig {
  double h = 1e-3;
  std::int64_t max_steps = 0;
  bool bridge_correction = true;
};

std::int64_t effective_max_steps(const StepConfig& step);
void validate_step_config(const StepConfig& step);

// The SDE dX = b(X) dt + sigma(X) dB with its dimension. Coefficients come
// as constants, parsed real expressions over x1..xd, or callbacks.
// Lipschitz continuity of b and sigma (the existence hypothesis for the
// strong solution) is the caller's responsibility and is not verified.
class SdeSpec {
 public:
  // out has dim entries (drift) or dim*dim row-major entries (diffusion).
  using VectorFieldFn = std::function<void(std::span<const double>, std::span<double>)>;
  using MatrixFieldFn = std::function<void(std::span<const double>, std::span<double>)>;

  // Inert placeholder; assign from one of the factories before use.
  SdeSpec() = default;

  static SdeSpec constant_coefficients(int dim, std::vector<double> drift,
                                       std::vector<double> diffusion_row_major,
                                       std::string description = "");
  static SdeSpec standard_brownian(int dim);

  // Linear drift b(x) = A x + b0 with constant diffusion.
  static SdeSpec linear_drift(int dim, std::vector<double> a_row_major,
                              std::vector<double> b0,
                              std::vector<double> diffusion_row_major,
                              std::string description = "");
  static SdeSpec from_expressions(int dim, const std::vector<Expr>& drift,
                                  const std::vector<std::vector<Expr>>& diffusion,
                                  std::string description = "");
  static SdeSpec from_callbacks(int dim, VectorFieldFn drift, MatrixFieldFn diffusion,
                                std::string description = "");

  int dim() const noexcept { return dim_; }
  const std::string& description() const noexcept { return description_; }

  void eval_drift(std::span<const double> x, std::span<double> out) const;
  void eval_diffusion(std::span<const double> x, std::span<double> out) const;

  // Both coefficient fields folded to constants (the fast stepping path).
  bool constant_coefficients_p() const noexcept { return constant_; }
  std::span<const double> constant_drift() const noexcept { return drift_const_; }
  std::span<const double> constant_diffusion() const noexcept { return diffusion_const_; }

  // Samples points in the box and rejects non-finite coefficient values.
  void validate_finite_on(const BoundingBox& box, int n_probes = 64) const;

 private:
  int dim_ = 1;
  std::string description_;
  VectorFieldFn drift_;
  MatrixFieldFn diffusion_;
  bool constant_ = false;
  std::vector<double> drift_const_, diffusion_const_;
};

// One Euler-Maruyama step: x + b(x) h + sigma(x) (sqrt(h) xi).
// Throws NumericalError naming the first non-finite coordinate.
std::vector<double> euler_step(std::span<const double> x, const SdeSpec& spec, double h,
                               std::span<const double> xi);

// Generator L u = sum_i b_i d_i u + sum_ij a_ij d_i d_j u with a = sigma
// sigma^T / 2, by second-order central differences at spacing fd_step.
double apply_generator(const std::function<double(std::span<const double>)>& u,
                       const SdeSpec& spec, std::span<const double> x, double fd_step);

// The fd_step default: 1e-4 times the bounding-box diameter.
double default_fd_step(const BoundingBox& box);

}  // namespace wavemc
