#include "wavemc/reference_solvers.hpp"

#include <algorithm>
#include <cmath>

#include "wavemc/format.hpp"

namespace wavemc {

double GridFunction1D::operator()(double xq) const {
  if (xq <= x.front()) return values.front();
  if (xq >= x.back()) return values.back();
  const double dx = x[1] - x[0];
  const auto i = std::min(static_cast<std::size_t>((xq - x.front()) / dx),
                          x.size() - 2);
  const double w = (xq - x[i]) / dx;
  return (1.0 - w) * values[i] + w * values[i + 1];
}

GridFunction1D solve_mean_exit_ode(const SdeSpec& spec, double a, double b, int n_grid) {
  if (spec.dim() != 1) throw ConfigError("solve_mean_exit_ode: 1D only");
  if (!(a < b)) throw ConfigError("solve_mean_exit_ode: requires a < b");
  if (n_grid < 3) throw ConfigError("solve_mean_exit_ode: n_grid must be >= 3");

  const auto n = static_cast<std::size_t>(n_grid);
  const double dx = (b - a) / static_cast<double>(n_grid - 1);
  GridFunction1D g;
  g.x.resize(n);
  g.values.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) g.x[i] = a + static_cast<double>(i) * dx;

  // Interior rows: (a_i/dx^2 - b_i/2dx) g_{i-1} - (2 a_i/dx^2) g_i
  //              + (a_i/dx^2 + b_i/2dx) g_{i+1} = -1.
  const std::size_t m = n - 2;
  std::vector<double> sub(m), diag(m), sup(m), rhs(m, -1.0);
  double drift = 0.0, sigma = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double xi = g.x[i + 1];
    spec.eval_drift(std::span{&xi, 1}, std::span{&drift, 1});
    spec.eval_diffusion(std::span{&xi, 1}, std::span{&sigma, 1});
    const double ai = 0.5 * sigma * sigma;
    if (std::abs(ai) < 1e-14)
      throw NumericalError("solve_mean_exit_ode: degenerate diffusion at x=" +
                           format_double(xi));
    sub[i] = ai / (dx * dx) - drift / (2.0 * dx);
    diag[i] = -2.0 * ai / (dx * dx);
    sup[i] = ai / (dx * dx) + drift / (2.0 * dx);
  }

  // Thomas algorithm.
  for (std::size_t i = 1; i < m; ++i) {
    if (std::abs(diag[i - 1]) < 1e-300)
      throw NumericalError("solve_mean_exit_ode: singular tridiagonal system");
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  if (std::abs(diag[m - 1]) < 1e-300)
    throw NumericalError("solve_mean_exit_ode: singular tridiagonal system");
  g.values[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;)
    g.values[i + 1] = (rhs[i] - sup[i] * g.values[i + 2]) / diag[i];
  return g;
}

WaveGrid wave_fd_solve(const SdeSpec& spec, double a, double b, const WaveData& data,
                       const WaveFdConfig& cfg) {
  if (spec.dim() != 1) throw ConfigError("wave_fd_solve: 1D only");
  if (!(a < b)) throw ConfigError("wave_fd_solve: requires a < b");
  if (cfg.nx < 3) throw ConfigError("wave_fd_solve: nx must be >= 3");
  if (!(cfg.T > 0.0)) throw ConfigError("wave_fd_solve: T must be positive");
  if (!data.left || !data.right || !data.position || !data.velocity)
    throw ConfigError("wave_fd_solve: all data functions must be set");

  const auto nx = static_cast<std::size_t>(cfg.nx);
  const double dx = (b - a) / static_cast<double>(cfg.nx - 1);

  WaveGrid grid;
  grid.x.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) grid.x[i] = a + static_cast<double>(i) * dx;

  // Coefficients per node and the CFL bound dt <= dx / sqrt(2 max a).
  std::vector<double> an(nx), bn(nx);
  double a_max = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    double drift = 0.0, sigma = 0.0;
    spec.eval_drift(std::span{&grid.x[i], 1}, std::span{&drift, 1});
    spec.eval_diffusion(std::span{&grid.x[i], 1}, std::span{&sigma, 1});
    an[i] = 0.5 * sigma * sigma;
    bn[i] = drift;
    a_max = std::max(a_max, an[i]);
  }
  if (a_max <= 0.0) throw ConfigError("wave_fd_solve: diffusion vanishes on the whole grid");
  const double dt_cfl = dx / std::sqrt(2.0 * a_max);
  const double dt = cfg.dt > 0.0 ? cfg.dt : 0.5 * dt_cfl;
  if (dt > dt_cfl * (1.0 + 1e-12))
    throw CflError("wave_fd_solve: dt=" + format_double(dt) + " violates the CFL bound dx/sqrt(2 max a)=" +
                   format_double(dt_cfl));

  const auto nt = static_cast<std::size_t>(std::llround(std::ceil(cfg.T / dt - 1e-9)));
  grid.t.resize(nt + 1);
  for (std::size_t k = 0; k <= nt; ++k) grid.t[k] = static_cast<double>(k) * dt;
  grid.u.assign((nt + 1) * nx, Complex{});

  // L u at interior node i of level `cur`.
  const auto lap = [&](const Complex* cur, std::size_t i) {
    const Complex second = (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]) / (dx * dx);
    const Complex first = (cur[i + 1] - cur[i - 1]) / (2.0 * dx);
    return an[i] * second + bn[i] * first;
  };

  Complex* u0 = grid.u.data();
  for (std::size_t i = 0; i < nx; ++i) u0[i] = data.position(grid.x[i]);
  u0[0] = data.left(0.0);
  u0[nx - 1] = data.right(0.0);

  if (nt >= 1) {
    Complex* u1 = grid.u.data() + nx;
    for (std::size_t i = 1; i + 1 < nx; ++i)
      u1[i] = u0[i] + dt * data.velocity(grid.x[i]) + dt * dt * lap(u0, i);
    u1[0] = data.left(dt);
    u1[nx - 1] = data.right(dt);
  }

  double scale0 = 1.0;
  for (std::size_t i = 0; i < nx; ++i) scale0 = std::max(scale0, std::abs(u0[i]));

  for (std::size_t k = 2; k <= nt; ++k) {
    const Complex* prev = grid.u.data() + (k - 2) * nx;
    const Complex* cur = grid.u.data() + (k - 1) * nx;
    Complex* next = grid.u.data() + k * nx;
    for (std::size_t i = 1; i + 1 < nx; ++i)
      next[i] = 2.0 * cur[i] - prev[i] + 2.0 * dt * dt * lap(cur, i);
    next[0] = data.left(grid.t[k]);
    next[nx - 1] = data.right(grid.t[k]);
    if (k % 64 == 0) {
      double m = 0.0;
      for (std::size_t i = 0; i < nx; ++i) m = std::max(m, std::abs(next[i]));
      if (m > 1e10 * scale0)
        throw CflError("wave_fd_solve: blow-up detected (max |u| grew by more than 1e10); "
                       "check the CFL condition");
    }
  }
  return grid;
}

ContinuationReport fd_continuation_check(const DataFunction& f, const SdeSpec& spec,
                                         const DomainSpec& dom, double t0, double t1,
                                         const EstimatorConfig& mc_cfg,
                                         const WaveFdConfig& fd_cfg) {
  if (dom.dim() != 1 || spec.dim() != 1)
    throw ConfigError("fd_continuation_check: 1D only");
  if (!(t0 > 0.0) || !(t1 > t0))
    throw ConfigError("fd_continuation_check: requires 0 < t0 < t1");

  const double a = dom.bounding_box().lo[0];
  const double b = dom.bounding_box().hi[0];
  const auto nx = static_cast<std::size_t>(fd_cfg.nx);
  if (fd_cfg.nx < 5) throw ConfigError("fd_continuation_check: nx must be >= 5");
  const double dx = (b - a) / static_cast<double>(fd_cfg.nx - 1);

  // Monte Carlo initial slices at t0 with a common seed across nodes, so
  // the statistical error entering the march is smooth in x.
  std::vector<Complex> u0(nx), v0(nx);
  double u0_stderr = 0.0, v0_stderr = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    const double xi = a + static_cast<double>(i) * dx;
    const Estimate eu = estimate_u(f, spec, dom, t0, std::span{&xi, 1}, mc_cfg);
    const Estimate ev = estimate_dt_u(f, spec, dom, t0, std::span{&xi, 1}, mc_cfg);
    u0[i] = eu.mean;
    v0[i] = ev.mean;
    u0_stderr = std::max(u0_stderr, std::hypot(eu.stderr_re, eu.stderr_im));
    v0_stderr = std::max(v0_stderr, std::hypot(ev.stderr_re, ev.stderr_im));
  }

  // March t0 -> t1 with lateral data f(t, .) (exact on the boundary).
  WaveData data;
  data.left = [&f, a, t0](double s) { return f.eval(Complex(t0 + s, 0.0), std::span{&a, 1}); };
  data.right = [&f, b, t0](double s) { return f.eval(Complex(t0 + s, 0.0), std::span{&b, 1}); };
  data.position = [&u0, a, dx](double x) {
    return u0[static_cast<std::size_t>(std::llround((x - a) / dx))];
  };
  data.velocity = [&v0, a, dx](double x) {
    return v0[static_cast<std::size_t>(std::llround((x - a) / dx))];
  };

  WaveFdConfig cfg = fd_cfg;
  cfg.T = t1 - t0;
  if (cfg.dt <= 0.0) {
    // Land exactly on t1 with a stable step.
    double drift = 0.0, sigma = 0.0, amax = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      const double xi = a + static_cast<double>(i) * dx;
      spec.eval_drift(std::span{&xi, 1}, std::span{&drift, 1});
      spec.eval_diffusion(std::span{&xi, 1}, std::span{&sigma, 1});
      amax = std::max(amax, 0.5 * sigma * sigma);
    }
    const double dt_cfl = dx / std::sqrt(2.0 * std::max(amax, 1e-300));
    const auto nt = static_cast<std::size_t>(std::ceil(cfg.T / (0.9 * dt_cfl)));
    cfg.dt = cfg.T / static_cast<double>(std::max<std::size_t>(nt, 1));
  }
  const WaveGrid grid = wave_fd_solve(spec, a, b, data, cfg);
  const auto final_slice = grid.slice(grid.t.size() - 1);

  ContinuationReport rep;
  rep.t0 = t0;
  rep.t1 = t1;
  rep.nx = fd_cfg.nx;
  rep.dt = cfg.dt;

  // Probe roughly 7 interior nodes; compare against independent direct MC.
  const std::size_t stride = std::max<std::size_t>(1, (nx - 2) / 8);
  EstimatorConfig direct_cfg = mc_cfg;
  direct_cfg.seed = mix64(mc_cfg.seed + 0x51CE5EEDull);
  const double march = t1 - t0;
  for (std::size_t i = stride; i + 1 < nx; i += stride) {
    const double xi = a + static_cast<double>(i) * dx;
    const Estimate direct = estimate_u(f, spec, dom, t1, std::span{&xi, 1}, direct_cfg);
    const double err = std::abs(final_slice[i] - direct.mean);
    const double direct_stderr = std::hypot(direct.stderr_re, direct.stderr_im);
    // Initial-data error propagates at most like |e_u(0)| + (t1-t0)|e_v(0)|.
    const double budget = 5.0 * (direct_stderr + u0_stderr + march * v0_stderr);
    rep.probe_x.push_back(xi);
    rep.u_fd.push_back(final_slice[i]);
    rep.u_mc.push_back(direct.mean);
    rep.probe_budget.push_back(budget);
    rep.max_abs_error = std::max(rep.max_abs_error, err);
    rep.stderr_budget = std::max(rep.stderr_budget, budget);
  }

  rep.pass = true;
  for (std::size_t k = 0; k < rep.probe_x.size(); ++k) {
    const double err = std::abs(rep.u_fd[k] - rep.u_mc[k]);
    const double allowed = std::max(rep.probe_budget[k], rep.rel_floor * std::abs(rep.u_mc[k]));
    if (err > allowed) rep.pass = false;
  }
  return rep;
}

HarmonicReport harmonic_check(const DataFunction& f, const SdeSpec& spec,
                              const DomainSpec& dom, std::span<const double> probe_x,
                              const EstimatorConfig& cfg) {
  if (!f.f_expr().has_value())
    throw ConfigError("harmonic_check: requires an expression-backed data function");
  if (f.f_expr()->contains_z())
    throw ConfigError("harmonic_check: f must not reference z");
  if (probe_x.empty()) throw ConfigError("harmonic_check: needs at least one probe point");

  HarmonicReport rep;
  rep.t_independent = true;
  bool linear_ok = true;

  const bool bm_like = dom.dim() == 1 && spec.constant_coefficients_p() &&
                       spec.constant_drift()[0] == 0.0;
  rep.linear_check_applicable = bm_like;

  // Same seed, different t: the integrand ignores z, so estimates must be
  // bit-identical.
  const double t_probe[2] = {0.25, 0.7};
  for (double xp : probe_x) {
    const Estimate e1 = estimate_u(f, spec, dom, t_probe[0], std::span{&xp, 1}, cfg);
    const Estimate e2 = estimate_u(f, spec, dom, t_probe[1], std::span{&xp, 1}, cfg);
    if (e1.mean.real() != e2.mean.real() || e1.mean.imag() != e2.mean.imag())
      rep.t_independent = false;
    rep.probe_x.push_back(xp);
    rep.estimates.push_back(e1.mean);

    if (bm_like) {
      // Harmonic functions of (sigma^2/2) d^2/dx^2 are linear: the estimate
      // must reproduce the interpolant of the boundary values.
      const double a = dom.bounding_box().lo[0];
      const double b = dom.bounding_box().hi[0];
      const Complex fa = f.eval(Complex(0.0, 0.0), std::span{&a, 1});
      const Complex fb = f.eval(Complex(0.0, 0.0), std::span{&b, 1});
      const Complex lin = fa * ((b - xp) / (b - a)) + fb * ((xp - a) / (b - a));
      rep.expected.push_back(lin);
      const double dev = std::abs(e1.mean - lin);
      const double allowed =
          e1.exact ? 1e-15 : 3.0 * std::hypot(e1.stderr_re, e1.stderr_im);
      rep.max_abs_deviation = std::max(rep.max_abs_deviation, dev);
      rep.max_allowed = std::max(rep.max_allowed, allowed);
      if (dev > allowed) linear_ok = false;
    }
  }

  rep.pass = rep.t_independent && linear_ok;
  return rep;
}

}  // namespace wavemc
