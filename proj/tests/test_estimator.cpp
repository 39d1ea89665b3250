#include <doctest.h>

#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "wavemc/estimator.hpp"
#include "wavemc/reference_solvers.hpp"

using namespace wavemc;

namespace {

const SdeSpec& bm() {
  static const SdeSpec s = SdeSpec::standard_brownian(1);
  return s;
}

const DomainSpec& unit_interval() {
  static const DomainSpec d = DomainSpec::interval(0.0, 1.0);
  return d;
}

EstimatorConfig quick_cfg(std::int64_t n = 20000, double h = 1e-3) {
  EstimatorConfig cfg;
  cfg.n_samples = n;
  cfg.seed = 42;
  cfg.step = StepConfig{h, 0, true};
  return cfg;
}

double joint_stderr(const Estimate& a, const Estimate& b) {
  return std::sqrt(a.stderr_re * a.stderr_re + a.stderr_im * a.stderr_im +
                   b.stderr_re * b.stderr_re + b.stderr_im * b.stderr_im);
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("constant data function: exact mean, zero spread") {
  const auto f = DataFunction::from_text("2.5", 1);
  const double x = 0.5;
  const auto e = estimate_u(f, bm(), unit_interval(), 0.7, std::span{&x, 1}, quick_cfg(500));
  CHECK(e.mean == Complex(2.5, 0.0));
  CHECK(e.stderr_re == 0.0);
  CHECK(e.stderr_im == 0.0);
  CHECK(e.n_effective == 500);
}

TEST_CASE("f = z: mean is t, dt-estimate is exactly 1") {
  const auto f = DataFunction::from_text("z", 1);
  const double x = 0.5;
  const auto e = estimate_u(f, bm(), unit_interval(), 0.7, std::span{&x, 1}, quick_cfg());
  // real part of every sample is t; only the imaginary part fluctuates
  CHECK(e.mean.real() == doctest::Approx(0.7));
  CHECK(std::abs(e.mean - Complex(0.7, 0.0)) <= 3.0 * (e.stderr_re + e.stderr_im));

  const auto d = estimate_dt_u(f, bm(), unit_interval(), 0.7, std::span{&x, 1}, quick_cfg());
  CHECK(d.mean == Complex(1.0, 0.0));
  CHECK(d.stderr_re == 0.0);
}

TEST_CASE("t = 0 and boundary points return f exactly with zero variance") {
  const auto f = DataFunction::from_text("exp(x1+z)", 1);
  const double inside = 0.3, at_b = 1.0;

  const auto e0 = estimate_u(f, bm(), unit_interval(), 0.0, std::span{&inside, 1}, quick_cfg());
  CHECK(e0.exact);
  CHECK(e0.mean == std::exp(Complex(0.3, 0.0)));
  CHECK(e0.stderr_re == 0.0);
  CHECK(e0.n_effective == 0);

  const auto eb = estimate_u(f, bm(), unit_interval(), 0.4, std::span{&at_b, 1}, quick_cfg());
  CHECK(eb.exact);
  CHECK(eb.mean == std::exp(Complex(1.4, 0.0)));

  const auto d0 = estimate_dt_u(f, bm(), unit_interval(), 0.0, std::span{&inside, 1},
                                quick_cfg());
  CHECK(d0.exact);
  CHECK(d0.mean == std::exp(Complex(0.3, 0.0)));
}

TEST_CASE("input validation") {
  const auto f = DataFunction::from_text("z", 1);
  const double x = 0.5, outside = 2.0;
  CHECK_THROWS_AS(estimate_u(f, bm(), unit_interval(), -0.1, std::span{&x, 1}, quick_cfg()),
                  ConfigError);
  CHECK_THROWS_AS(estimate_u(f, bm(), unit_interval(), 0.5, std::span{&outside, 1},
                             quick_cfg()),
                  ConfigError);
  auto odd = quick_cfg(3);
  odd.antithetic = true;
  CHECK_THROWS_AS(estimate_u(f, bm(), unit_interval(), 0.5, std::span{&x, 1}, odd),
                  ConfigError);
  auto tiny = quick_cfg(1);
  CHECK_THROWS_AS(estimate_u(f, bm(), unit_interval(), 0.5, std::span{&x, 1}, tiny),
                  ConfigError);
}

TEST_CASE("paper example: u(t,x) = e^{x+t}") {
  const auto f = DataFunction::from_text("exp(x1+z)", 1);
  const double x = 0.5;
  auto cfg = quick_cfg(40000, 5e-4);
  cfg.antithetic = true;
  const auto e = estimate_u(f, bm(), unit_interval(), 0.5, std::span{&x, 1}, cfg);
  const double target = std::exp(1.0);
  CHECK(std::abs(e.mean.real() - target) <= std::max(5.0 * e.stderr_re, 0.02 * target));
  CHECK(std::abs(e.mean.imag()) <= 1e-12 * (1.0 + std::abs(e.mean)));  // antithetic realness
  CHECK(e.n_effective == 20000);  // pairs
  CHECK(e.tau_max > e.tau_mean);
  CHECK_FALSE(e.diag.integrability_suspect);
}

TEST_CASE("monomial oracle: u(1, 0.5) = 1 - E[tau] for f = z^2") {
  const auto f = DataFunction::from_text("z^2", 1);
  const auto oracle = solve_mean_exit_ode(bm(), 0.0, 1.0, 401);
  const double x = 0.5;
  auto cfg = quick_cfg(40000, 1e-3);
  cfg.antithetic = true;
  const auto e = estimate_u(f, bm(), unit_interval(), 1.0, std::span{&x, 1}, cfg);
  const double target = 1.0 - oracle(0.5);
  CHECK(std::abs(e.mean.real() - target) <= 4.0 * e.stderr_re + 0.005);
}

TEST_CASE("Kakutani reduction: z-free f is t-independent bit-for-bit") {
  const auto f = DataFunction::from_text("x1^2", 1);
  const double x = 0.3;
  const auto cfg = quick_cfg(10000);
  const auto e1 = estimate_u(f, bm(), unit_interval(), 0.25, std::span{&x, 1}, cfg);
  const auto e2 = estimate_u(f, bm(), unit_interval(), 0.9, std::span{&x, 1}, cfg);
  CHECK(e1.mean.real() == e2.mean.real());
  CHECK(e1.stderr_re == e2.stderr_re);
  // harmonic extension of x^2 boundary data on (0,1) is the identity map
  CHECK(std::abs(e1.mean.real() - 0.3) <= 3.0 * e1.stderr_re + 2e-3);
}

TEST_CASE("truncation policy rejects the run loudly") {
  const auto f = DataFunction::from_text("z", 1);
  const auto frozen = SdeSpec::constant_coefficients(1, {0.0}, {0.0});
  const double x = 0.5;
  auto cfg = quick_cfg(200);
  cfg.step.max_steps = 100;
  CHECK_THROWS_AS(estimate_u(f, frozen, unit_interval(), 0.5, std::span{&x, 1}, cfg),
                  TruncationError);
}

TEST_CASE("conditional kernels: worked examples") {
  CHECK(conditional_kernel_poly(1, 0.8, 0.3) == Complex(0.8, 0.0));
  CHECK(conditional_kernel_poly(2, 0.8, 0.3).real() == doctest::Approx(0.64 - 0.3));
  CHECK(conditional_kernel_poly(4, 1.0, 0.5).real() ==
        doctest::Approx(1.0 - 6.0 * 0.5 + 3.0 * 0.25));
  CHECK(conditional_kernel_poly(0, 0.0, 0.0) == Complex(1.0, 0.0));
  CHECK_THROWS_AS(conditional_kernel_poly(31, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(conditional_kernel_poly(-1, 1.0, 1.0), ConfigError);

  CHECK(std::abs(conditional_kernel_exp({1.0, 0.0}, 0.0, 2.0) - std::exp(Complex(-1.0, 0.0))) <
        1e-15);
  const Complex a(0.7, 0.4);
  const Complex k = conditional_kernel_exp(a, 0.3, 0.8);
  CHECK(std::abs(k - std::exp(a * 0.3 - 0.5 * a * a * 0.8)) < 1e-15);
}

TEST_CASE("conditional kernels against brute-force averaging over Z") {
  RngStream rng(404, 0, RngStream::Purpose::probes);
  const double t = 0.3, tau = 0.8;
  const int n = 400000;
  std::vector<double> vals_exp, vals_p4;
  vals_exp.reserve(n);
  vals_p4.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Complex arg(t, std::sqrt(tau) * rng.gaussian());
    vals_exp.push_back(std::exp(arg).real());
    const Complex sq = arg * arg;
    vals_p4.push_back((sq * sq).real());
  }
  const auto ms_exp = oracles::mean_stderr(vals_exp);
  const auto ms_p4 = oracles::mean_stderr(vals_p4);
  CHECK(std::abs(ms_exp.mean - conditional_kernel_exp({1.0, 0.0}, t, tau).real()) <=
        3.0 * ms_exp.stderr_of_mean);
  CHECK(std::abs(ms_p4.mean - conditional_kernel_poly(4, t, tau).real()) <=
        3.0 * ms_p4.stderr_of_mean);
}

TEST_CASE("separable-form detection") {
  auto form = detect_separable(parse_expr("exp(x1+z)", 1));
  REQUIRE(form.has_value());
  REQUIRE(form->terms.size() == 1);
  CHECK(form->terms[0].is_exp);
  CHECK(form->terms[0].a.simplified() == Expr::constant(1.0));
  const double x = 0.7;
  CHECK(form->terms[0].g.eval({}, std::span{&x, 1}).real() ==
        doctest::Approx(std::exp(0.7)));

  form = detect_separable(parse_expr("z^2", 1));
  REQUIRE(form.has_value());
  CHECK(form->terms.size() == 1);
  CHECK_FALSE(form->terms[0].is_exp);
  CHECK(form->terms[0].poly_n == 2);

  form = detect_separable(parse_expr("(x1+z)^2", 1));
  REQUIRE(form.has_value());
  CHECK(form->terms.size() == 4);  // x1*x1 + x1*z + z*x1 + z*z, uncollected
  {
    // the distributed kernels reproduce E[(x1 + t + i sqrt(tau) Z)^2 | tau]
    const double t = 0.7, tau = 0.3, xv = 0.4;
    Complex total{};
    for (const auto& term : form->terms) {
      const Complex g = term.g.eval({}, std::span{&xv, 1});
      total += g * (term.is_exp ? conditional_kernel_exp(term.a.eval({}, std::span{&xv, 1}),
                                                         t, tau)
                                : conditional_kernel_poly(term.poly_n, t, tau));
    }
    const double want = xv * xv + 2.0 * xv * t + t * t - tau;
    CHECK(total.real() == doctest::Approx(want).epsilon(1e-12));
    CHECK(total.imag() == doctest::Approx(0.0));
  }

  form = detect_separable(parse_expr("x1*exp(2*z) + z^3/(1+x1^2)", 1));
  REQUIRE(form.has_value());
  CHECK(form->terms.size() == 2);

  // a(x) exp(a(x) z) with a z-free coefficient in the exponent is separable
  form = detect_separable(parse_expr("exp(x1*z)", 1));
  REQUIRE(form.has_value());
  CHECK(form->terms[0].is_exp);
  CHECK(form->terms[0].a == Expr::x(0));

  CHECK_FALSE(detect_separable(parse_expr("sin(z)", 1)).has_value());
  CHECK_FALSE(detect_separable(parse_expr("exp(z^2)", 1)).has_value());
  CHECK_FALSE(detect_separable(parse_expr("z*exp(z)", 1)).has_value());
  CHECK_FALSE(detect_separable(parse_expr("exp(x1+z)/z", 1)).has_value());
}

TEST_CASE("Rao-Blackwell: paired comparison with the naive estimator") {
  const auto f = DataFunction::from_text("exp(x1+z)", 1);
  const double x = 0.5, t = 0.5;
  auto cfg = quick_cfg(20000, 1e-3);

  const auto naive = estimate_u(f, bm(), unit_interval(), t, std::span{&x, 1}, cfg);
  const auto cond =
      estimate_u_rao_blackwell(f, bm(), unit_interval(), t, std::span{&x, 1}, cfg);

  // same exit samples (same seed): agreement within 3 joint stderr
  CHECK(std::abs(cond.mean - naive.mean) <= 3.0 * joint_stderr(cond, naive));

  // law of total variance: the conditional estimator never fluctuates more
  const double var_naive = naive.stderr_re * naive.stderr_re +
                           naive.stderr_im * naive.stderr_im;
  const double var_cond = cond.stderr_re * cond.stderr_re + cond.stderr_im * cond.stderr_im;
  CHECK(var_cond <= 1.05 * var_naive);

  // the paper's almost-sure bound on the conditional per-sample values
  CHECK(cond.diag.max_abs_f <= std::exp(x + t + 1.0) * (1.0 + 1e-12));

  // f = z^2 reduces to averaging t^2 - tau
  const auto fz2 = DataFunction::from_text("z^2", 1);
  const auto naive2 = estimate_u(fz2, bm(), unit_interval(), 1.0, std::span{&x, 1}, cfg);
  const auto cond2 =
      estimate_u_rao_blackwell(fz2, bm(), unit_interval(), 1.0, std::span{&x, 1}, cfg);
  CHECK(std::abs(cond2.mean.real() - (1.0 - cond2.tau_mean)) < 1e-12);
  CHECK(std::abs(cond2.mean - naive2.mean) <= 3.0 * joint_stderr(cond2, naive2));
}

TEST_CASE("Rao-Blackwell: pattern mismatch handling") {
  const auto f = DataFunction::from_text("sin(z)", 1);
  const double x = 0.5;
  CHECK_THROWS_WITH_AS(
      estimate_u_rao_blackwell(f, bm(), unit_interval(), 0.5, std::span{&x, 1}, quick_cfg(200)),
      doctest::Contains("rao_blackwell=off"), ConfigError);

  auto cfg = quick_cfg(2000);
  cfg.rao_blackwell = RaoBlackwellMode::auto_detect;  // falls back to naive
  CHECK_NOTHROW(estimate_u(f, bm(), unit_interval(), 0.5, std::span{&x, 1}, cfg));

  cfg.rao_blackwell = RaoBlackwellMode::poly_family;
  CHECK_THROWS_AS(estimate_u(f, bm(), unit_interval(), 0.5, std::span{&x, 1}, cfg),
                  ConfigError);
  // family assertions also reject the wrong family
  const auto fexp = DataFunction::from_text("exp(x1+z)", 1);
  CHECK_THROWS_AS(estimate_u(fexp, bm(), unit_interval(), 0.5, std::span{&x, 1}, cfg),
                  ConfigError);
  cfg.rao_blackwell = RaoBlackwellMode::exp_family;
  CHECK_NOTHROW(estimate_u(fexp, bm(), unit_interval(), 0.5, std::span{&x, 1}, cfg));
}

TEST_CASE("grid evaluation: seeds, determinism, exact rows") {
  const auto f = DataFunction::from_text("exp(x1+z)", 1);
  auto cfg = quick_cfg(2000);
  const std::vector<double> t_grid{0.0, 0.5};
  const std::vector<std::vector<double>> x_grid{{0.3}, {0.7}};

  const auto table = grid_evaluate(f, bm(), unit_interval(), t_grid, x_grid, cfg);
  REQUIRE(table.cells.size() == 4);

  // the 1x1 grid equals estimate_u under the derived per-cell seed
  auto cell_cfg = cfg;
  cell_cfg.seed = derive_cell_seed(cfg.seed, 1, 0);
  const double x = 0.3;
  const auto direct = estimate_u(f, bm(), unit_interval(), 0.5, std::span{&x, 1}, cell_cfg);
  CHECK(table.at(1, 0).est.mean.real() == direct.mean.real());
  CHECK(table.at(1, 0).est.mean.imag() == direct.mean.imag());

  // t = 0 row is exact
  CHECK(table.at(0, 0).est.exact);
  CHECK(table.at(0, 0).est.mean == std::exp(Complex(0.3, 0.0)));
  CHECK(table.at(0, 1).est.mean == std::exp(Complex(0.7, 0.0)));

  // worker count never changes the table
  auto cfg4 = cfg;
  cfg4.threads = 4;
  const auto table4 = grid_evaluate(f, bm(), unit_interval(), t_grid, x_grid, cfg4);
  for (std::size_t i = 0; i < table.cells.size(); ++i) {
    CHECK(table.cells[i].est.mean.real() == table4.cells[i].est.mean.real());
    CHECK(table.cells[i].est.stderr_re == table4.cells[i].est.stderr_re);
  }

  // cell errors carry coordinates
  CHECK_THROWS_WITH_AS(grid_evaluate(f, bm(), unit_interval(), std::vector<double>{-1.0},
                                     x_grid, cfg),
                       doctest::Contains("cell"), Error);
}

TEST_CASE("CLT scaling: quadrupling n halves stderr") {
  const auto f = DataFunction::from_text("exp(x1+z)", 1);
  const double x = 0.5;
  const auto small = estimate_u(f, bm(), unit_interval(), 0.5, std::span{&x, 1},
                                quick_cfg(4000, 2e-3));
  const auto large = estimate_u(f, bm(), unit_interval(), 0.5, std::span{&x, 1},
                                quick_cfg(16000, 2e-3));
  const double ratio = small.stderr_re / (2.0 * large.stderr_re);
  CHECK(ratio > 1.0 / 1.3);
  CHECK(ratio < 1.3);
}

TEST_CASE("two derivative routes at t=0 are both available") {
  // f(z,x) = z phi(x) with phi vanishing on the boundary: the formula route
  // returns phi(x) at t=0, while the representation itself is 0 for every
  // t > 0, so the one-sided difference sees (0 - 0)/delta. Both answers are
  // exposed; no claim is made about which limit is the right one.
  const auto f = DataFunction::from_text("z*sin(pi*x1)", 1);
  const double x = 0.5;
  const auto cfg = quick_cfg(4000, 2e-3);

  const auto formula = estimate_dt_u(f, bm(), unit_interval(), 0.0, std::span{&x, 1}, cfg);
  CHECK(formula.exact);
  CHECK(formula.mean.real() == doctest::Approx(1.0));  // phi(0.5) = sin(pi/2)

  const auto fd = estimate_dt_u_forward_difference(f, bm(), unit_interval(), 0.0,
                                                   std::span{&x, 1}, cfg, 1e-3);
  // u(delta) averages f at exit points where sin(pi x) = 0 exactly, up to
  // the imaginary Gaussian factor; the real part vanishes identically.
  CHECK(std::abs(fd.mean.real()) <= 3.0 * fd.stderr_re + 1e-9);
  CHECK(std::abs(fd.mean.real() - formula.mean.real()) > 0.5);  // the routes disagree here
}

TEST_CASE("tail diagnostics") {
  std::vector<Complex> flat(1000, Complex(1.0, 0.0));
  const auto d = tail_diagnostics(flat);
  CHECK(d.max_over_mean == doctest::Approx(1.0));
  CHECK_FALSE(d.integrability_suspect);

  std::vector<Complex> spiked(10000, Complex(1.0, 0.0));
  spiked[7] = Complex(1e6, 0.0);
  const auto s = tail_diagnostics(spiked);
  CHECK(s.integrability_suspect);
  CHECK(s.max_over_mean > 1000.0);
  CHECK(s.excess_kurtosis > 100.0);

  std::vector<Complex> few(50, Complex(1.0, 0.0));
  CHECK_THROWS_AS(tail_diagnostics(few), ConfigError);
}

}  // TEST_SUITE
