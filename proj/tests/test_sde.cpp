#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "support/oracles.hpp"
#include "wavemc/rng.hpp"
#include "wavemc/sde.hpp"

using namespace wavemc;

TEST_SUITE("sde") {

TEST_CASE("euler_step: worked examples") {
  const auto still = SdeSpec::constant_coefficients(1, {0.0}, {0.0});
  const double x = 0.5, xi = 1.7;
  CHECK(euler_step(std::span{&x, 1}, still, 0.3, std::span{&xi, 1})[0] == 0.5);

  const auto pure_drift = SdeSpec::constant_coefficients(1, {1.0}, {0.0});
  const double zero = 0.0;
  CHECK(euler_step(std::span{&zero, 1}, pure_drift, 0.1, std::span{&xi, 1})[0] ==
        doctest::Approx(0.1));

  const auto bm = SdeSpec::standard_brownian(1);
  const double unit = 1.0;
  CHECK(euler_step(std::span{&zero, 1}, bm, 0.04, std::span{&unit, 1})[0] ==
        doctest::Approx(0.2));
}

TEST_CASE("euler_step names the non-finite coordinate") {
  auto blow_up = SdeSpec::from_callbacks(
      2,
      [](std::span<const double> x, std::span<double> out) {
        out[0] = 0.0;
        out[1] = 1e308 * (1.0 + x[0]);
      },
      [](std::span<const double>, std::span<double> out) {
        for (auto& v : out) v = 0.0;
      });
  const std::vector<double> x{5.0, 0.0}, xi{0.0, 0.0};
  CHECK_THROWS_WITH_AS(euler_step(x, blow_up, 1e10, xi), doctest::Contains("x2"),
                       NumericalError);
}

TEST_CASE("mixed full-matrix diffusion") {
  // sigma = [[1,0],[1,1]]: X2 accumulates both noise components.
  const auto spec = SdeSpec::constant_coefficients(2, {0.0, 0.0}, {1.0, 0.0, 1.0, 1.0});
  const std::vector<double> x{0.0, 0.0}, xi{1.0, 2.0};
  const auto out = euler_step(x, spec, 1.0, xi);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(3.0));
}

TEST_CASE("apply_generator: polynomials are exact up to fd error") {
  const auto bm = SdeSpec::standard_brownian(1);
  const double x = 0.3;

  auto constant = [](std::span<const double>) { return 4.2; };
  CHECK(apply_generator(constant, bm, std::span{&x, 1}, 1e-4) == doctest::Approx(0.0));

  auto square = [](std::span<const double> p) { return p[0] * p[0]; };
  CHECK(apply_generator(square, bm, std::span{&x, 1}, 1e-4) == doctest::Approx(1.0).epsilon(1e-6));

  const auto bm2 = SdeSpec::standard_brownian(2);
  auto radial = [](std::span<const double> p) { return p[0] * p[0] + p[1] * p[1]; };
  const std::vector<double> origin{0.1, -0.2};
  CHECK(apply_generator(radial, bm2, origin, 1e-4) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("apply_generator handles drift and mixed second derivatives") {
  // sigma = [[1,0],[1,1]] gives a = 1/2 sigma sigma^T = [[.5,.5],[.5,1]];
  // with u = x1 x2 the mixed term contributes a12 + a21 = 1.
  const auto spec = SdeSpec::constant_coefficients(2, {2.0, -1.0}, {1.0, 0.0, 1.0, 1.0});
  auto u = [](std::span<const double> p) { return p[0] * p[1]; };
  const std::vector<double> x{0.7, 0.4};
  // L u = b1 x2 + b2 x1 + (a12 + a21) = 2*0.4 - 1*0.7 + 1.0
  CHECK(apply_generator(u, spec, x, 1e-4) == doctest::Approx(0.8 - 0.7 + 1.0).epsilon(1e-6));
}

TEST_CASE("linear drift family") {
  // b(x) = A x + b0 with A = [[-1, 0], [0, -2]], b0 = (1, 2)
  const auto ou = SdeSpec::linear_drift(2, {-1.0, 0.0, 0.0, -2.0}, {1.0, 2.0},
                                        {1.0, 0.0, 0.0, 1.0});
  CHECK_FALSE(ou.constant_coefficients_p());
  const std::vector<double> x{0.5, 0.25}, xi{0.0, 0.0};
  const auto out = euler_step(x, ou, 0.1, xi);
  CHECK(out[0] == doctest::Approx(0.5 + 0.1 * (1.0 - 0.5)));
  CHECK(out[1] == doctest::Approx(0.25 + 0.1 * (2.0 - 0.5)));
}

TEST_CASE("expression coefficients fold to the constant fast path") {
  const auto folded = SdeSpec::from_expressions(
      1, {parse_real_expr("0", 1)}, {{parse_real_expr("2*0.5", 1)}});
  CHECK(folded.constant_coefficients_p());
  CHECK(folded.constant_diffusion()[0] == doctest::Approx(1.0));

  const auto varying = SdeSpec::from_expressions(
      1, {parse_real_expr("x1", 1)}, {{parse_real_expr("1", 1)}});
  CHECK_FALSE(varying.constant_coefficients_p());
  const double x = 0.5, xi = 0.0;
  CHECK(euler_step(std::span{&x, 1}, varying, 0.1, std::span{&xi, 1})[0] ==
        doctest::Approx(0.55));
}

TEST_CASE("validate_finite_on rejects non-finite coefficient fields") {
  auto nan_drift = SdeSpec::from_callbacks(
      1,
      [](std::span<const double>, std::span<double> out) {
        out[0] = std::numeric_limits<double>::quiet_NaN();
      },
      [](std::span<const double>, std::span<double> out) { out[0] = 1.0; });
  CHECK_THROWS_AS(nan_drift.validate_finite_on(BoundingBox{{0.0}, {1.0}}), ConfigError);

  const auto bm = SdeSpec::standard_brownian(1);
  CHECK_NOTHROW(bm.validate_finite_on(BoundingBox{{0.0}, {1.0}}));
}

TEST_CASE("step config defaults and validation") {
  StepConfig s;
  s.h = 1e-4;
  CHECK(effective_max_steps(s) == 1000000000);  // 1e8/h, capped at 1e9
  s.h = 1.0;
  CHECK(effective_max_steps(s) == 100000000);  // below the cap: 1e8/h
  s.max_steps = 50;
  CHECK(effective_max_steps(s) == 50);
  s.h = 0.0;
  CHECK_THROWS_AS(validate_step_config(s), ConfigError);
}

TEST_CASE("weak consistency: Brownian marginal moments") {
  // t = 1 marginal of dX = dB: mean 0, variance 1, within 4 standard errors.
  const auto bm = SdeSpec::standard_brownian(1);
  const int n = 40000, steps = 50;
  const double h = 0.02;
  std::vector<double> terminal(n);
  for (int k = 0; k < n; ++k) {
    RngStream rng(12345, static_cast<std::uint64_t>(k));
    double x = 0.0, xi = 0.0;
    for (int s = 0; s < steps; ++s) {
      xi = rng.gaussian();
      x = euler_step(std::span{&x, 1}, bm, h, std::span{&xi, 1})[0];
    }
    terminal[static_cast<std::size_t>(k)] = x;
  }
  const double t = steps * h;
  const auto ms = oracles::mean_stderr(terminal);
  CHECK(std::abs(ms.mean) <= 4.0 * std::sqrt(t / n));
  double ss = 0.0;
  for (double v : terminal) ss += (v - ms.mean) * (v - ms.mean);
  const double var = ss / (n - 1);
  CHECK(std::abs(var - t) <= 4.0 * t * std::sqrt(2.0 / n));
}

}  // TEST_SUITE
