#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wavemc/data_function.hpp"
#include "wavemc/domain.hpp"
#include "wavemc/exit_sampler.hpp"
#include "wavemc/sde.hpp"

namespace wavemc {

enum class RaoBlackwellMode {
  off,         // average f(t + i sqrt(tau) Z, X(tau)) directly
  exp_family,  // require every separable kernel to be exp(a z)
  poly_family, // require every separable kernel to be z^n
  auto_detect, // use the conditional estimator when f separates, else fall back
};

struct EstimatorConfig {
  std::int64_t n_samples = 10000;  // f-evaluations; antithetic pairs share an exit sample
  bool antithetic = false;         // requires n_samples even
  RaoBlackwellMode rao_blackwell = RaoBlackwellMode::off;
  std::uint64_t seed = 0;
  StepConfig step;
  unsigned threads = 0;  // 0 = hardware concurrency; never changes the numbers
};

struct EstimateDiagnostics {
  double max_abs_f = 0.0;        // largest |f| seen across raw evaluations
  double excess_kurtosis = 0.0;  // of |per-sample value|
  std::int64_t truncated_count = 0;
  bool integrability_suspect = false;  // top-1% of |f| carries > 50% of the mass
};

struct Estimate {
  Complex mean{};
  double stderr_re = 0.0, stderr_im = 0.0;  // sample sd / sqrt(n_effective)
  std::int64_t n_effective = 0;             // 0 for exact (non-sampled) evaluations
  double tau_mean = 0.0, tau_max = 0.0;
  EstimateDiagnostics diag;
  bool exact = false;  // t = 0 or boundary point: value is f, zero variance
};

// u(t,x) as the sample average of f(t + i sqrt(tau_k) Z_k, X_k(tau_k)).
// t = 0 and boundary starts short-circuit to the exact value f with zero
// variance (the tau = 0 convention). Negative t is rejected. Runs whose
// truncated-exit fraction exceeds 1e-4 throw TruncationError rather than
// return a silently biased mean.
Estimate estimate_u(const DataFunction& f, const SdeSpec& spec, const DomainSpec& dom,
                    double t, std::span<const double> x, const EstimatorConfig& cfg);

// dt u(t,x): the same sampling applied to df/dz (by holomorphy the
// t-derivative of the integrand); shares exit samples with estimate_u for
// equal seeds.
Estimate estimate_dt_u(const DataFunction& f, const SdeSpec& spec, const DomainSpec& dom,
                       double t, std::span<const double> x, const EstimatorConfig& cfg);

// One-sided finite-difference route to dt u: (u(t+delta) - u(t)) / delta
// on shared exit samples. At t = 0 this and estimate_dt_u answer different
// questions when f(z,x) = z phi(x) with phi vanishing on the boundary: the
// formula gives phi(x) while the representation is identically 0 for t > 0.
// Both routes stay available so the discrepancy is observable.
Estimate estimate_dt_u_forward_difference(const DataFunction& f, const SdeSpec& spec,
                                          const DomainSpec& dom, double t,
                                          std::span<const double> x,
                                          const EstimatorConfig& cfg, double delta = 1e-3);

// E[exp(a (t + i sqrt(tau) Z)) | tau] = exp(a t - a^2 tau / 2).
Complex conditional_kernel_exp(Complex a, double t, double tau);

// E[(t + i sqrt(tau) Z)^n | tau]: odd moments of Z vanish, even ones are
// (k-1)!!, so the value is sum_{2j<=n} C(n,2j) t^{n-2j} (-tau)^j (2j-1)!!.
// n > 30 is rejected (double-factorial overflow guard).
Complex conditional_kernel_poly(int n, double t, double tau);

// One separable summand g_j(x) h_j(z) of a data function, with h either
// exp(a z) (a z-free, usually constant) or z^n.
struct SeparableTerm {
  Expr g;           // z-free spatial factor
  bool is_exp = false;
  Expr a;           // exp kernels: z-free coefficient in the exponent
  int poly_n = 0;   // poly kernels: degree
};

struct SeparableForm {
  std::vector<SeparableTerm> terms;
};

// Syntactic detection of f = sum_j g_j(x) h_j(z) after distributing
// products over sums; nullopt when f does not match.
std::optional<SeparableForm> detect_separable(const Expr& f);

// Conditional (Rao-Blackwell) estimator: integrates Z out analytically per
// exit sample, averaging sum_j g_j(X_k) K_j(t, tau_k). Unbiased for the
// same u; per-sample variance never exceeds the naive estimator's on the
// same exit samples. Throws ConfigError when f does not separate,
// directing the caller to RaoBlackwellMode::off.
Estimate estimate_u_rao_blackwell(const DataFunction& f, const SdeSpec& spec,
                                  const DomainSpec& dom, double t, std::span<const double> x,
                                  const EstimatorConfig& cfg);

struct GridCell {
  double t = 0.0;
  std::vector<double> x;
  Estimate est;
};

struct GridTable {
  std::vector<double> t_grid;
  std::vector<std::vector<double>> x_grid;
  std::vector<GridCell> cells;  // t-major: cells[ti * x_grid.size() + xi]

  const GridCell& at(std::size_t ti, std::size_t xi) const {
    return cells[ti * x_grid.size() + xi];
  }
};

// Deterministic per-cell seed: every cell is an independent estimate and
// the whole table reproduces under any parallel schedule.
std::uint64_t derive_cell_seed(std::uint64_t seed, std::size_t t_index, std::size_t x_index);

GridTable grid_evaluate(const DataFunction& f, const SdeSpec& spec, const DomainSpec& dom,
                        std::span<const double> t_grid,
                        const std::vector<std::vector<double>>& x_grid,
                        const EstimatorConfig& cfg, bool derivative = false);

struct TailDiagnostics {
  double max_over_mean = 0.0;    // max |f| / mean |f|
  double excess_kurtosis = 0.0;  // of |f|
  bool integrability_suspect = false;
};

// Runtime proxy for the integrability hypothesis E|f| < infinity: flags
// the run when the top-1% of |f| values carries more than half the total
// mass. Requires at least 100 samples.
TailDiagnostics tail_diagnostics(std::span<const Complex> samples);

}  // namespace wavemc
