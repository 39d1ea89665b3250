#include "selftest.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "wavemc/data_function.hpp"
#include "wavemc/domain.hpp"
#include "wavemc/estimator.hpp"
#include "wavemc/exit_sampler.hpp"
#include "wavemc/expr.hpp"
#include "wavemc/format.hpp"
#include "wavemc/reference_solvers.hpp"
#include "wavemc/rng.hpp"
#include "wavemc/sde.hpp"

namespace {

using namespace wavemc;

int g_failures = 0;

void check(const std::string& name, bool ok, const std::string& detail = "") {
  if (ok) {
    std::cout << "ok   " << name << "\n";
  } else {
    ++g_failures;
    std::cout << "FAIL " << name << (detail.empty() ? "" : ": " + detail) << "\n";
  }
}

void check_near(const std::string& name, double got, double want, double tol) {
  check(name, std::abs(got - want) <= tol,
        "got " + format_double(got) + ", want " + format_double(want) + " +- " +
            format_double(tol));
}

double re(Complex c) { return c.real(); }

void expression_checks() {
  const Expr f = parse_expr("exp(x1 + z)", 1);
  const double x_half = 1.0;
  check_near("parse/eval exp(x1+z) at (0,1)", re(f.eval({0.0, 0.0}, {&x_half, 1})),
             std::exp(1.0), 1e-12);

  const Expr ez = parse_expr("exp(z)", 1);
  const Complex euler = ez.eval(Complex(0.0, std::numbers::pi), {});
  check("Euler identity exp(i pi) = -1",
        std::abs(euler - Complex(-1.0, 0.0)) < 1e-12);

  bool position_ok = false;
  try {
    parse_expr("exp(x1 +", 1);
  } catch (const ParseError& e) {
    position_ok = e.position() == 9;
  }
  check("parse error position for 'exp(x1 +'", position_ok);

  const Expr zsq = parse_expr("z^2", 1);
  const Expr dz = zsq.differentiate_z();
  check_near("d/dz z^2 at z=3", re(dz.eval({3.0, 0.0}, {})), 6.0, 1e-12);
  check("d/dz exp(x1+z) = exp(x1+z)", f.differentiate_z() == f.simplified());

  check("cauchy_derivative exp at 0",
        std::abs(cauchy_derivative(ez, {0.0, 0.0}, {}, 0.1, 32) - Complex(1.0, 0.0)) < 1e-12);
  const Expr cube = parse_expr("z^3", 1);
  check("cauchy_derivative z^3 at 2",
        std::abs(cauchy_derivative(cube, {2.0, 0.0}, {}) - Complex(12.0, 0.0)) < 1e-10);
}

void data_function_checks() {
  const auto dom = DomainSpec::interval(0.0, 1.0);
  const auto f0 = DataFunction::from_text("0", 1);
  const Expr phi = parse_real_expr("sin(pi*x1)", 1);
  const auto f1 = augment_velocity(f0, phi);
  const double xh = 0.5;
  check_near("augment_velocity, f=0 phi=sin(pi x1) at (0.5, 0.5)",
             re(f1.eval({0.5, 0.0}, {&xh, 1})), 0.5, 1e-12);

  const auto fe = DataFunction::from_text("exp(x1+z)", 1);
  const auto fe1 = augment_velocity(fe, parse_real_expr("x1*(1-x1)", 1));
  check_near("augmented derivative at (0, 0.5)", re(fe1.eval_dz({0.0, 0.0}, {&xh, 1})),
             std::exp(0.5) + 0.25, 1e-12);

  check("reflection symmetry exp(x1+z)", check_reflection_symmetry(fe, dom));
  check("reflection asymmetry i*z",
        !check_reflection_symmetry(DataFunction::from_text("i*z", 1), dom));
  check("reflection symmetry z^2+x1",
        check_reflection_symmetry(DataFunction::from_text("z^2 + x1", 1), dom));
}

void geometry_checks() {
  const auto iv = DomainSpec::interval(0.0, 1.0);
  const double half = 0.5, one = 1.0;
  check("interval contains 0.5", iv.contains({&half, 1}));
  check("interval excludes boundary 1.0", !iv.contains({&one, 1}));

  const auto b2 = DomainSpec::ball({0.0, 0.0}, 1.0);
  const std::vector<double> p{0.6, 0.8};
  check("ball excludes |x|=1", !b2.contains(p));

  const double x_in = 0.9, x_out = 1.1;
  const auto cr = iv.boundary_crossing({&x_in, 1}, {&x_out, 1});
  check_near("interval crossing lambda", cr.lambda, 0.5, 1e-12);
  check_near("interval crossing point", cr.x_hit[0], 1.0, 1e-12);

  const auto box = DomainSpec::box({0.0, 0.0}, {1.0, 1.0});
  const std::vector<double> bin{0.5, 0.9}, bout{0.5, 1.3};
  const auto bc = box.boundary_crossing(bin, bout);
  check_near("box crossing lambda", bc.lambda, 0.25, 1e-12);
  check_near("box crossing face", bc.x_hit[1], 1.0, 1e-12);

  check_near("bridge probability, d_in=0", bridge_exit_probability(0.0, 0.1, 1.0, 0.01), 1.0,
             0.0);
  const double s = 1.0, h = 0.01, d = s * std::sqrt(h) / std::sqrt(2.0);
  check_near("bridge probability exp(-1)", bridge_exit_probability(d, d, s, h),
             std::exp(-1.0), 1e-12);
}

void sde_checks() {
  const auto still = SdeSpec::constant_coefficients(1, {0.0}, {0.0});
  const double x0 = 0.5, xi1 = 1.3;
  check_near("euler zero dynamics", euler_step({&x0, 1}, still, 0.1, {&xi1, 1})[0], 0.5, 0.0);

  const auto drift = SdeSpec::constant_coefficients(1, {1.0}, {0.0});
  const double zero = 0.0;
  check_near("euler deterministic drift", euler_step({&zero, 1}, drift, 0.1, {&xi1, 1})[0],
             0.1, 1e-15);

  const auto bm = SdeSpec::standard_brownian(1);
  const double xi_unit = 1.0;
  check_near("euler diffusion sqrt(h)*xi", euler_step({&zero, 1}, bm, 0.04, {&xi_unit, 1})[0],
             0.2, 1e-15);

  auto quad = [](std::span<const double> x) { return x[0] * x[0]; };
  check_near("generator of x^2 under BM", apply_generator(quad, bm, {&zero, 1}, 1e-4), 1.0,
             1e-6);
  const auto bm2 = SdeSpec::standard_brownian(2);
  auto quad2 = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; };
  const std::vector<double> origin{0.0, 0.0};
  check_near("generator of |x|^2 under 2D BM", apply_generator(quad2, bm2, origin, 1e-4), 2.0,
             1e-5);

  RngStream r1(42, 0), r2(42, 0);
  bool same = true;
  for (int i = 0; i < 64; ++i) same = same && r1.gaussian() == r2.gaussian();
  check("rng stream determinism", same);

  RngStream g(7, 0);
  double sum = 0.0, sum2 = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double v = g.gaussian();
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  check_near("rng gaussian mean", mean, 0.0, 0.01);
  check_near("rng gaussian variance", sum2 / n - mean * mean, 1.0, 0.01);
}

void kernel_checks() {
  check_near("poly kernel n=1", re(conditional_kernel_poly(1, 0.7, 0.3)), 0.7, 0.0);
  check_near("poly kernel n=2", re(conditional_kernel_poly(2, 0.7, 0.3)),
             0.7 * 0.7 - 0.3, 1e-15);
  check_near("poly kernel n=4 at (1, 0.5)", re(conditional_kernel_poly(4, 1.0, 0.5)),
             1.0 - 6.0 * 0.5 + 3.0 * 0.25, 1e-12);
  check("exp kernel tau=0", std::abs(conditional_kernel_exp({2.0, 0.0}, 0.3, 0.0) -
                                     std::exp(Complex(0.6, 0.0))) < 1e-12);
  check("exp kernel e^-1", std::abs(conditional_kernel_exp({1.0, 0.0}, 0.0, 2.0) -
                                    std::exp(Complex(-1.0, 0.0))) < 1e-12);
}

void oracle_checks() {
  const auto bm = SdeSpec::standard_brownian(1);
  const auto g = solve_mean_exit_ode(bm, 0.0, 1.0, 201);
  check_near("mean exit ODE g(0.5)", g(0.5), 0.25, 1e-10);
  check("mean exit ODE boundary values", g.values.front() == 0.0 && g.values.back() == 0.0);
}

void sampling_checks(unsigned threads) {
  const auto bm = SdeSpec::standard_brownian(1);
  const auto dom = DomainSpec::interval(0.0, 1.0);

  const double on_boundary = 1.0;
  RngStream r(1, 0);
  const auto s0 = sample_exit(bm, dom, {&on_boundary, 1}, {}, r);
  check("boundary start exits at tau=0", s0.tau == 0.0 && s0.x_exit[0] == 1.0);

  StepConfig step{1e-3, 0, true};
  const double half = 0.5;
  const std::int64_t n = 20000;
  const auto batch = sample_exit_batch(bm, dom, {&half, 1}, step, 7, n, threads);
  double mean = 0.0, var = 0.0, right = 0.0;
  for (const auto& s : batch) {
    mean += s.tau;
    if (s.x_exit[0] == 1.0) right += 1.0;
  }
  mean /= static_cast<double>(n);
  for (const auto& s : batch) var += (s.tau - mean) * (s.tau - mean);
  var /= static_cast<double>(n - 1);
  const double se = std::sqrt(var / static_cast<double>(n));
  check_near("mean exit time from 0.5", mean, 0.25, 3.0 * se + 0.01);
  check_near("exit-side symmetry at 0.5", right / static_cast<double>(n), 0.5,
             3.0 * std::sqrt(0.25 / static_cast<double>(n)) + 0.01);
}

void estimator_checks(unsigned threads) {
  const auto bm = SdeSpec::standard_brownian(1);
  const auto dom = DomainSpec::interval(0.0, 1.0);
  const auto fe = DataFunction::from_text("exp(x1+z)", 1);
  const double half = 0.5;

  EstimatorConfig cfg;
  cfg.n_samples = 40000;
  cfg.antithetic = true;
  cfg.seed = 3;
  cfg.step = {5e-4, 0, true};
  cfg.threads = threads;

  const Estimate exact0 = estimate_u(fe, bm, dom, 0.0, {&half, 1}, cfg);
  check("t=0 exact recovery", exact0.exact && exact0.stderr_re == 0.0 &&
                                  std::abs(exact0.mean - std::exp(Complex(0.5, 0.0))) < 1e-15);

  const double at_boundary = 1.0;
  const Estimate exactb = estimate_u(fe, bm, dom, 0.7, {&at_boundary, 1}, cfg);
  check("boundary exact recovery",
        exactb.exact && std::abs(exactb.mean - std::exp(Complex(1.7, 0.0))) < 1e-15);

  const Estimate e = estimate_u(fe, bm, dom, 0.5, {&half, 1}, cfg);
  const double target = std::exp(1.0);
  const double tol = std::max(5.0 * e.stderr_re, 0.02 * target);
  check_near("paper example u(0.5, 0.5) = e", e.mean.real(), target, tol);
  check("antithetic realness", std::abs(e.mean.imag()) <= 1e-12 * (1.0 + std::abs(e.mean)));

  EstimatorConfig rb_cfg = cfg;
  rb_cfg.antithetic = false;
  const Estimate erb = estimate_u_rao_blackwell(fe, bm, dom, 0.5, {&half, 1}, rb_cfg);
  check_near("conditional estimator matches", erb.mean.real(), target,
             std::max(5.0 * erb.stderr_re, 0.02 * target));
  check("conditional stderr not larger", erb.stderr_re <= e.stderr_re * 1.5 + 1e-12);

  const auto fx = DataFunction::from_text("x1^2", 1);
  const Estimate eh = estimate_u(fx, bm, dom, 0.5, {&half, 1}, cfg);
  check_near("kakutani harmonic value at 0.5", eh.mean.real(), 0.5,
             3.0 * eh.stderr_re + 0.01);
}

void wave_checks() {
  const auto bm = SdeSpec::standard_brownian(1);
  WaveData data;
  data.position = [](double x) { return Complex(std::sin(std::numbers::pi * x), 0.0); };
  data.velocity = [](double) { return Complex(0.0, 0.0); };
  data.left = [](double) { return Complex(0.0, 0.0); };
  data.right = [](double) { return Complex(0.0, 0.0); };
  WaveFdConfig cfg;
  cfg.nx = 201;
  cfg.T = 0.75;
  const auto grid = wave_fd_solve(bm, 0.0, 1.0, data, cfg);
  double worst = 0.0;
  const auto last = grid.slice(grid.t.size() - 1);
  const double tf = grid.t.back();
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    const double exact = std::sin(std::numbers::pi * grid.x[i]) * std::cos(std::numbers::pi * tf);
    worst = std::max(worst, std::abs(last[i] - Complex(exact, 0.0)));
  }
  check("wave solver sin(pi x)cos(pi t)", worst < 5e-4,
        "max error " + format_double(worst));
}

}  // namespace

int run_selftest(unsigned threads) {
  g_failures = 0;
  expression_checks();
  data_function_checks();
  geometry_checks();
  sde_checks();
  kernel_checks();
  oracle_checks();
  sampling_checks(threads);
  estimator_checks(threads);
  wave_checks();
  std::cout << (g_failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
  return g_failures;
}
