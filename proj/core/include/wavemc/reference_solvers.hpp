#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "wavemc/data_function.hpp"
#include "wavemc/domain.hpp"
#include "wavemc/estimator.hpp"
#include "wavemc/sde.hpp"

namespace wavemc {

struct GridFunction1D {
  std::vector<double> x;       // uniform, ascending
  std::vector<double> values;

  double operator()(double xq) const;  // linear interpolation, clamped ends
};

// Dynkin oracle: solves a(x) g'' + b(x) g' = -1 on (a,b) with g(a)=g(b)=0,
// a = sigma^2/2, by second-order central differences and a tridiagonal
// solve. g(x) is the mean exit time E[tau] from x; exact for quadratic g
// (constant coefficients), second-order otherwise.
GridFunction1D solve_mean_exit_ode(const SdeSpec& spec, double a, double b, int n_grid);

// Leapfrog discretization of u_tt = 2 L u (i.e. u_tt/2 = L u) on an
// interval, Dirichlet lateral data, Taylor start u1 = p + dt v + dt^2 (L p).
// CFL: dt <= dx / sqrt(2 max a).
struct WaveFdConfig {
  int nx = 201;      // spatial grid points including both ends
  double dt = 0.0;   // time step; 0 = largest stable step / 2
  double T = 1.0;    // march duration
};

struct WaveData {
  std::function<Complex(double)> left, right;        // u(t, a), u(t, b)
  std::function<Complex(double)> position, velocity; // u(0, x), u_t(0, x)
};

struct WaveGrid {
  std::vector<double> x;         // nx nodes
  std::vector<double> t;         // nt+1 levels
  std::vector<Complex> u;        // t-major: u[k * nx + i]

  Complex at(std::size_t k, std::size_t i) const { return u[k * x.size() + i]; }
  std::span<const Complex> slice(std::size_t k) const {
    return {u.data() + k * x.size(), x.size()};
  }
};

WaveGrid wave_fd_solve(const SdeSpec& spec, double a, double b, const WaveData& data,
                       const WaveFdConfig& cfg);

// Cross-validation protocol: estimate u and dt u on a time slice t0 by
// Monte Carlo, feed them to the wave solver as initial data with lateral
// boundaries f(t, .), march to t1, and compare against direct Monte Carlo
// estimates there. t0 must be bounded away from 0.
struct ContinuationReport {
  double t0 = 0.0, t1 = 0.0;
  int nx = 0;
  double dt = 0.0;
  double max_abs_error = 0.0;   // max |u_FD - u_MC| over the probes
  double stderr_budget = 0.0;   // largest allowed statistical discrepancy
  double rel_floor = 0.02;      // relative tolerance floor
  bool pass = false;
  std::vector<double> probe_x;
  std::vector<Complex> u_fd, u_mc;
  std::vector<double> probe_budget;  // per-probe allowance
};

ContinuationReport fd_continuation_check(const DataFunction& f, const SdeSpec& spec,
                                         const DomainSpec& dom, double t0, double t1,
                                         const EstimatorConfig& mc_cfg,
                                         const WaveFdConfig& fd_cfg);

// Kakutani reduction: a z-free f collapses the representation to the
// elliptic Dirichlet solution. Verifies bit-identical estimates across t
// for a fixed seed, and (for 1D driftless constant diffusion) agreement
// with the linear interpolant of the boundary values within 3 stderr.
struct HarmonicReport {
  bool t_independent = false;
  bool linear_check_applicable = false;
  double max_abs_deviation = 0.0;
  double max_allowed = 0.0;
  bool pass = false;
  std::vector<double> probe_x;
  std::vector<Complex> estimates;
  std::vector<Complex> expected;  // linear interpolant (when applicable)
};

HarmonicReport harmonic_check(const DataFunction& f, const SdeSpec& spec,
                              const DomainSpec& dom, std::span<const double> probe_x,
                              const EstimatorConfig& cfg);

}  // namespace wavemc
