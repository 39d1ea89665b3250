#include "wavemc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel_util.hpp"
#include "wavemc/format.hpp"

namespace wavemc {

namespace {

constexpr double kTruncationRejectFraction = 1e-4;

double excess_kurtosis_of(std::span<const double> v) {
  if (v.size() < 4) return 0.0;
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double a : v) mean += a;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double a : v) {
    const double d = a - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  if (m2 <= 0.0) return 0.0;
  return m4 / (m2 * m2) - 3.0;
}

// Top-1% mass rule: suspect when the largest ceil(n/100) values of |f|
// carry more than half of sum |f|.
bool heavy_tail_flag(std::vector<double> abs_values) {
  const std::size_t n = abs_values.size();
  if (n < 100) return false;
  double total = 0.0;
  for (double a : abs_values) total += a;
  if (total <= 0.0) return false;
  const std::size_t k = (n + 99) / 100;
  std::partial_sort(abs_values.begin(), abs_values.begin() + static_cast<std::ptrdiff_t>(k),
                    abs_values.end(), std::greater<double>());
  double top = 0.0;
  for (std::size_t i = 0; i < k; ++i) top += abs_values[i];
  return top > 0.5 * total;
}

struct McArrays {
  std::vector<Complex> values;
  std::vector<double> taus;
  std::vector<double> raw_abs;  // per sample: largest |f| among its raw evaluations
  std::vector<unsigned char> used;
};

Estimate finalize(const McArrays& r) {
  const std::size_t n_total = r.values.size();
  std::size_t n_used = 0;
  for (unsigned char u : r.used) n_used += u;
  const std::int64_t truncated = static_cast<std::int64_t>(n_total - n_used);

  if (static_cast<double>(truncated) > kTruncationRejectFraction * static_cast<double>(n_total))
    throw TruncationError("truncated exit fraction " +
                          format_double(static_cast<double>(truncated) /
                                        static_cast<double>(n_total)) +
                          " exceeds " + format_double(kTruncationRejectFraction) +
                          "; increase max_steps or check for degenerate diffusion");
  if (n_used == 0) throw TruncationError("no usable samples: every exit was truncated");

  Estimate e;
  e.n_effective = static_cast<std::int64_t>(n_used);
  e.diag.truncated_count = truncated;

  Complex sum{};
  double tau_sum = 0.0, tau_max = 0.0, raw_max = 0.0;
  for (std::size_t k = 0; k < n_total; ++k) {
    if (!r.used[k]) continue;
    sum += r.values[k];
    tau_sum += r.taus[k];
    tau_max = std::max(tau_max, r.taus[k]);
    raw_max = std::max(raw_max, r.raw_abs[k]);
  }
  e.mean = sum / static_cast<double>(n_used);
  e.tau_mean = tau_sum / static_cast<double>(n_used);
  e.tau_max = tau_max;
  e.diag.max_abs_f = raw_max;

  if (n_used > 1) {
    double sr = 0.0, si = 0.0;
    for (std::size_t k = 0; k < n_total; ++k) {
      if (!r.used[k]) continue;
      const double dr = r.values[k].real() - e.mean.real();
      const double di = r.values[k].imag() - e.mean.imag();
      sr += dr * dr;
      si += di * di;
    }
    const double denom = static_cast<double>(n_used) * static_cast<double>(n_used - 1);
    e.stderr_re = std::sqrt(sr / denom);
    e.stderr_im = std::sqrt(si / denom);
  }

  std::vector<double> abs_values;
  abs_values.reserve(n_used);
  for (std::size_t k = 0; k < n_total; ++k)
    if (r.used[k]) abs_values.push_back(std::abs(r.values[k]));
  e.diag.excess_kurtosis = excess_kurtosis_of(abs_values);
  e.diag.integrability_suspect = heavy_tail_flag(std::move(abs_values));
  return e;
}

Estimate exact_estimate(Complex value) {
  Estimate e;
  e.mean = value;
  e.exact = true;
  e.diag.max_abs_f = std::abs(value);
  return e;
}

// Shared driver: exit sample k from RngStream(seed, k), value from
// value_fn, everything stored by index and reduced sequentially.
template <typename ValueFn>
McArrays run_mc(const SdeSpec& spec, const DomainSpec& dom, std::span<const double> x0,
                const StepConfig& step, std::uint64_t seed, std::int64_t n_exit,
                unsigned threads, ValueFn&& value_fn) {
  McArrays r;
  const auto n = static_cast<std::size_t>(n_exit);
  r.values.assign(n, Complex{});
  r.taus.assign(n, 0.0);
  r.raw_abs.assign(n, 0.0);
  r.used.assign(n, 0);

  detail::parallel_indexed(n_exit, threads, [&](std::int64_t k) {
    const auto idx = static_cast<std::size_t>(k);
    RngStream path_rng(seed, static_cast<std::uint64_t>(k), RngStream::Purpose::paths);
    const ExitSample es = sample_exit(spec, dom, x0, step, path_rng);
    if (es.truncated) return;  // excluded from averages, counted in diagnostics
    RngStream z_rng(seed, static_cast<std::uint64_t>(k), RngStream::Purpose::gaussians);
    const auto [value, raw_abs] = value_fn(es, z_rng);
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
      throw NumericalError("non-finite f value (tau=" + format_double(es.tau) + ")");
    r.values[idx] = value;
    r.taus[idx] = es.tau;
    r.raw_abs[idx] = raw_abs;
    r.used[idx] = 1;
  });
  return r;
}

struct ResolvedTerm {
  Expr g;
  bool is_exp;
  std::optional<Complex> a_const;
  Expr a;
  int poly_n;
};

std::vector<ResolvedTerm> resolve_terms(const SeparableForm& form) {
  std::vector<ResolvedTerm> out;
  out.reserve(form.terms.size());
  for (const auto& t : form.terms) {
    ResolvedTerm rt{t.g, t.is_exp, std::nullopt, t.a, t.poly_n};
    if (t.is_exp) {
      const Expr s = t.a.simplified();
      if (s.kind() == ExprKind::constant) rt.a_const = s.node()->value;
    }
    out.push_back(std::move(rt));
  }
  return out;
}

enum class Integrand { value, dz_derivative };

void validate_inputs(const DataFunction& f, const SdeSpec& spec, const DomainSpec& dom,
                     double t, std::span<const double> x, const EstimatorConfig& cfg) {
  if (f.dim() != spec.dim() || spec.dim() != dom.dim())
    throw ConfigError("estimate: dimension mismatch between f, sde and domain");
  if (x.size() != static_cast<std::size_t>(dom.dim()))
    throw ConfigError("estimate: x must have dim entries");
  if (!(t >= 0.0))
    throw ConfigError("estimate: t must be nonnegative (the representation is stated on "
                      "[0,inf) x closure(D))");
  if (!dom.in_closure(x)) throw ConfigError("estimate: x is outside the closure of the domain");
  if (cfg.n_samples < 2) throw ConfigError("estimate: n_samples must be >= 2");
  if (cfg.antithetic && cfg.n_samples % 2 != 0)
    throw ConfigError("estimate: antithetic estimation requires an even n_samples");
  validate_step_config(cfg.step);
  spec.validate_finite_on(dom.bounding_box());
}

Estimate estimate_naive(const DataFunction& f, const SdeSpec& spec, const DomainSpec& dom,
                        double t, std::span<const double> x, const EstimatorConfig& cfg,
                        Integrand which) {
  const auto eval = [&](Complex z, std::span<const double> xe) {
    return which == Integrand::value ? f.eval(z, xe) : f.eval_dz(z, xe);
  };

  if (cfg.antithetic) {
    const std::int64_t n_pairs = cfg.n_samples / 2;
    auto arrays = run_mc(spec, dom, x, cfg.step, cfg.seed, n_pairs, cfg.threads,
                         [&](const ExitSample& es, RngStream& zs) {
                           const double s = std::sqrt(es.tau) * zs.gaussian();
                           const Complex v1 = eval(Complex(t, s), es.x_exit);
                           const Complex v2 = eval(Complex(t, -s), es.x_exit);
                           return std::pair{0.5 * (v1 + v2),
                                            std::max(std::abs(v1), std::abs(v2))};
                         });
    return finalize(arrays);
  }

  auto arrays = run_mc(spec, dom, x, cfg.step, cfg.seed, cfg.n_samples, cfg.threads,
                       [&](const ExitSample& es, RngStream& zs) {
                         const Complex v =
                             eval(Complex(t, std::sqrt(es.tau) * zs.gaussian()), es.x_exit);
                         return std::pair{v, std::abs(v)};
                       });
  return finalize(arrays);
}

Estimate estimate_conditional(const std::vector<ResolvedTerm>& terms, const SdeSpec& spec,
                              const DomainSpec& dom, double t, std::span<const double> x,
                              const EstimatorConfig& cfg) {
  auto arrays = run_mc(spec, dom, x, cfg.step, cfg.seed, cfg.n_samples, cfg.threads,
                       [&](const ExitSample& es, RngStream&) {
                         Complex v{};
                         for (const auto& term : terms) {
                           const Complex g = term.g.eval({}, es.x_exit);
                           if (term.is_exp) {
                             const Complex a =
                                 term.a_const ? *term.a_const : term.a.eval({}, es.x_exit);
                             v += g * conditional_kernel_exp(a, t, es.tau);
                           } else {
                             v += g * conditional_kernel_poly(term.poly_n, t, es.tau);
                           }
                         }
                         return std::pair{v, std::abs(v)};
                       });
  return finalize(arrays);
}

bool family_matches(const SeparableForm& form, RaoBlackwellMode mode) {
  if (mode == RaoBlackwellMode::auto_detect) return true;
  for (const auto& t : form.terms) {
    if (mode == RaoBlackwellMode::exp_family && !t.is_exp && t.poly_n > 0) return false;
    if (mode == RaoBlackwellMode::poly_family && t.is_exp) return false;
  }
  return true;
}

Estimate estimate_impl(const DataFunction& f, const SdeSpec& spec, const DomainSpec& dom,
                       double t, std::span<const double> x, const EstimatorConfig& cfg,
                       Integrand which) {
  validate_inputs(f, spec, dom, t, x, cfg);

  // tau = 0 conventions: exact evaluation, zero variance.
  if (t == 0.0)
    return exact_estimate(which == Integrand::value ? f.eval(Complex(0.0, 0.0), x)
                                                    : f.eval_dz(Complex(0.0, 0.0), x));
  if (!dom.contains(x))
    return exact_estimate(which == Integrand::value ? f.eval(Complex(t, 0.0), x)
                                                    : f.eval_dz(Complex(t, 0.0), x));

  if (cfg.rao_blackwell != RaoBlackwellMode::off) {
    const auto& ast = which == Integrand::value ? f.f_expr() : f.df_dz_expr();
    std::optional<SeparableForm> form;
    if (ast.has_value()) form = detect_separable(*ast);
    if (form && family_matches(*form, cfg.rao_blackwell))
      return estimate_conditional(resolve_terms(*form), spec, dom, t, x, cfg);
    if (cfg.rao_blackwell != RaoBlackwellMode::auto_detect)
      throw ConfigError(
          "rao_blackwell: f does not separate into x-only factors times exp(a*z) or z^n "
          "kernels" +
          std::string(ast.has_value() ? "" : " (expression-backed f required)") +
          "; use rao_blackwell=off");
    // auto_detect falls back to the naive estimator
  }
  return estimate_naive(f, spec, dom, t, x, cfg, which);
}

}  // namespace

Estimate estimate_u(const DataFunction& f, const SdeSpec& spec, const DomainSpec& dom,
                    double t, std::span<const double> x, const EstimatorConfig& cfg) {
  return estimate_impl(f, spec, dom, t, x, cfg, Integrand::value);
}

Estimate estimate_dt_u(const DataFunction& f, const SdeSpec& spec, const DomainSpec& dom,
                       double t, std::span<const double> x, const EstimatorConfig& cfg) {
  return estimate_impl(f, spec, dom, t, x, cfg, Integrand::dz_derivative);
}

Estimate estimate_dt_u_forward_difference(const DataFunction& f, const SdeSpec& spec,
                                          const DomainSpec& dom, double t,
                                          std::span<const double> x,
                                          const EstimatorConfig& cfg, double delta) {
  if (!(delta > 0.0)) throw ConfigError("forward difference: delta must be positive");
  const Estimate hi = estimate_u(f, spec, dom, t + delta, x, cfg);
  const Estimate lo = estimate_u(f, spec, dom, t, x, cfg);  // same seed: shared exits
  Estimate e;
  e.mean = (hi.mean - lo.mean) / delta;
  // conservative: the shared-sample correlation only shrinks the spread
  e.stderr_re = std::hypot(hi.stderr_re, lo.stderr_re) / delta;
  e.stderr_im = std::hypot(hi.stderr_im, lo.stderr_im) / delta;
  e.n_effective = std::min(hi.n_effective, lo.n_effective);
  e.tau_mean = hi.tau_mean;
  e.tau_max = hi.tau_max;
  e.diag = hi.diag;
  e.exact = hi.exact && lo.exact;
  return e;
}

Estimate estimate_u_rao_blackwell(const DataFunction& f, const SdeSpec& spec,
                                  const DomainSpec& dom, double t, std::span<const double> x,
                                  const EstimatorConfig& cfg) {
  EstimatorConfig c = cfg;
  if (c.rao_blackwell == RaoBlackwellMode::off || c.rao_blackwell == RaoBlackwellMode::auto_detect)
    c.rao_blackwell = RaoBlackwellMode::auto_detect;
  validate_inputs(f, spec, dom, t, x, c);
  if (t == 0.0) return exact_estimate(f.eval(Complex(0.0, 0.0), x));
  if (!dom.contains(x)) return exact_estimate(f.eval(Complex(t, 0.0), x));

  if (!f.f_expr().has_value())
    throw ConfigError("rao_blackwell: requires an expression-backed data function; "
                      "use rao_blackwell=off");
  const auto form = detect_separable(*f.f_expr());
  if (!form || !family_matches(*form, c.rao_blackwell))
    throw ConfigError("rao_blackwell: f does not separate into x-only factors times "
                      "exp(a*z) or z^n kernels; use rao_blackwell=off");
  return estimate_conditional(resolve_terms(*form), spec, dom, t, x, c);
}

Complex conditional_kernel_exp(Complex a, double t, double tau) {
  return std::exp(a * t - 0.5 * a * a * tau);
}

Complex conditional_kernel_poly(int n, double t, double tau) {
  if (n < 0) throw ConfigError("conditional_kernel_poly: n must be >= 0");
  if (n > 30)
    throw ConfigError("conditional_kernel_poly: n > 30 rejected (double-factorial overflow)");
  // sum over even k = 2j: C(n,2j) t^{n-2j} (i sqrt(tau))^{2j} (2j-1)!!
  double value = 0.0;
  double binom = 1.0;        // C(n, 2j), updated incrementally
  double double_fact = 1.0;  // (2j-1)!!
  double tau_pow = 1.0;      // (-tau)^j
  for (int j = 0; 2 * j <= n; ++j) {
    if (j > 0) {
      const int k = 2 * j;
      binom *= static_cast<double>(n - k + 2) * static_cast<double>(n - k + 1) /
               (static_cast<double>(k - 1) * static_cast<double>(k));
      double_fact *= static_cast<double>(k - 1);
      tau_pow *= -tau;
    }
    value += binom * std::pow(t, n - 2 * j) * tau_pow * double_fact;
  }
  return Complex(value, 0.0);
}

std::uint64_t derive_cell_seed(std::uint64_t seed, std::size_t t_index, std::size_t x_index) {
  const std::uint64_t s = mix64(seed ^ mix64(0x9E3779B97F4A7C15ull + t_index));
  return mix64(s ^ mix64(0xC2B2AE3D27D4EB4Full + x_index));
}

GridTable grid_evaluate(const DataFunction& f, const SdeSpec& spec, const DomainSpec& dom,
                        std::span<const double> t_grid,
                        const std::vector<std::vector<double>>& x_grid,
                        const EstimatorConfig& cfg, bool derivative) {
  if (t_grid.empty() || x_grid.empty()) throw ConfigError("grid_evaluate: grids must be non-empty");
  for (const auto& p : x_grid)
    if (p.size() != static_cast<std::size_t>(dom.dim()))
      throw ConfigError("grid_evaluate: x grid point dim mismatch");

  GridTable table;
  table.t_grid.assign(t_grid.begin(), t_grid.end());
  table.x_grid = x_grid;
  table.cells.resize(t_grid.size() * x_grid.size());

  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
      EstimatorConfig cell_cfg = cfg;
      cell_cfg.seed = derive_cell_seed(cfg.seed, ti, xi);
      GridCell& cell = table.cells[ti * x_grid.size() + xi];
      cell.t = t_grid[ti];
      cell.x = x_grid[xi];
      try {
        cell.est = derivative ? estimate_dt_u(f, spec, dom, cell.t, cell.x, cell_cfg)
                              : estimate_u(f, spec, dom, cell.t, cell.x, cell_cfg);
      } catch (const Error& e) {
        throw Error(e.code(), "cell (t=" + format_double(cell.t) + ", x index " +
                                  std::to_string(xi) + "): " + e.what());
      }
    }
  }
  return table;
}

TailDiagnostics tail_diagnostics(std::span<const Complex> samples) {
  if (samples.size() < 100)
    throw ConfigError("tail_diagnostics: needs at least 100 samples");
  std::vector<double> abs_values(samples.size());
  double total = 0.0, max_abs = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    abs_values[i] = std::abs(samples[i]);
    total += abs_values[i];
    max_abs = std::max(max_abs, abs_values[i]);
  }
  TailDiagnostics d;
  const double mean = total / static_cast<double>(samples.size());
  d.max_over_mean = mean > 0.0 ? max_abs / mean : 1.0;
  d.excess_kurtosis = excess_kurtosis_of(abs_values);
  d.integrability_suspect = heavy_tail_flag(std::move(abs_values));
  return d;
}

}  // namespace wavemc
