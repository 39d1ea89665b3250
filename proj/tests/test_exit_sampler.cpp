#include <doctest.h>

#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "wavemc/exit_sampler.hpp"
#include "wavemc/reference_solvers.hpp"

using namespace wavemc;

namespace {

const SdeSpec& brownian1d() {
  static const SdeSpec bm = SdeSpec::standard_brownian(1);
  return bm;
}

}  // namespace

TEST_SUITE("exit_sampler") {

TEST_CASE("boundary start exits immediately with zero variance") {
  const auto dom = DomainSpec::interval(0.0, 1.0);
  for (std::uint64_t k = 0; k < 16; ++k) {
    RngStream rng(3, k);
    const double x0 = 1.0;
    const auto s = sample_exit(brownian1d(), dom, std::span{&x0, 1}, {}, rng);
    CHECK(s.tau == 0.0);
    CHECK(s.x_exit[0] == 1.0);
    CHECK(s.n_steps == 0);
    CHECK(s.exited_via == ExitVia::spatial_boundary);
    CHECK_FALSE(s.truncated);
  }
}

TEST_CASE("time-zero convention sample") {
  const double x0 = 0.5;
  const auto s = time_zero_sample(std::span{&x0, 1});
  CHECK(s.tau == 0.0);
  CHECK(s.exited_via == ExitVia::time_zero_convention);
  CHECK(s.x_exit[0] == 0.5);
}

TEST_CASE("start outside the closure is rejected") {
  const auto dom = DomainSpec::interval(0.0, 1.0);
  RngStream rng(3, 0);
  const double x0 = 1.5;
  CHECK_THROWS_AS(sample_exit(brownian1d(), dom, std::span{&x0, 1}, {}, rng), ConfigError);
}

TEST_CASE("mean exit time matches the BVP oracle") {
  const auto dom = DomainSpec::interval(0.0, 1.0);
  const auto oracle = solve_mean_exit_ode(brownian1d(), 0.0, 1.0, 401);
  const double x0 = 0.5;
  StepConfig step{1e-3, 0, true};
  const std::int64_t n = 20000;
  const auto batch = sample_exit_batch(brownian1d(), dom, std::span{&x0, 1}, step, 17, n);

  std::vector<double> taus;
  taus.reserve(static_cast<std::size_t>(n));
  for (const auto& s : batch) {
    REQUIRE_FALSE(s.truncated);
    taus.push_back(s.tau);
  }
  const auto ms = oracles::mean_stderr(taus);
  // 3 standard errors plus an O(h) bias allowance
  CHECK(std::abs(ms.mean - oracle(0.5)) <= 3.0 * ms.stderr_of_mean + 2e-3);
}

TEST_CASE("exit position law: gambler's ruin") {
  const auto dom = DomainSpec::interval(0.0, 1.0);
  const double x0 = 0.3;
  StepConfig step{5e-4, 0, true};
  const std::int64_t n = 20000;
  const auto batch = sample_exit_batch(brownian1d(), dom, std::span{&x0, 1}, step, 23, n);
  double right = 0.0;
  for (const auto& s : batch) {
    CHECK((s.x_exit[0] == 0.0 || s.x_exit[0] == 1.0));
    if (s.x_exit[0] == 1.0) right += 1.0;
  }
  const double p = right / static_cast<double>(n);
  const double se = std::sqrt(0.3 * 0.7 / static_cast<double>(n));
  CHECK(std::abs(p - 0.3) <= 3.0 * se + 2e-3);
}

TEST_CASE("batch: n=1 equals a single stream-0 sample") {
  const auto dom = DomainSpec::interval(0.0, 1.0);
  const double x0 = 0.4;
  StepConfig step{1e-3, 0, true};
  const auto batch = sample_exit_batch(brownian1d(), dom, std::span{&x0, 1}, step, 99, 1);
  RngStream rng(99, 0);
  const auto single = sample_exit(brownian1d(), dom, std::span{&x0, 1}, step, rng);
  CHECK(batch[0].tau == single.tau);
  CHECK(batch[0].x_exit[0] == single.x_exit[0]);
  CHECK(batch[0].n_steps == single.n_steps);
}

TEST_CASE("batch is bit-identical for any worker count") {
  const auto dom = DomainSpec::interval(0.0, 1.0);
  const double x0 = 0.6;
  StepConfig step{1e-3, 0, true};
  const std::int64_t n = 2000;
  const auto one = sample_exit_batch(brownian1d(), dom, std::span{&x0, 1}, step, 5, n, 1);
  const auto four = sample_exit_batch(brownian1d(), dom, std::span{&x0, 1}, step, 5, n, 4);
  const auto eight = sample_exit_batch(brownian1d(), dom, std::span{&x0, 1}, step, 5, n, 8);
  for (std::size_t k = 0; k < one.size(); ++k) {
    CHECK(one[k].tau == four[k].tau);
    CHECK(one[k].tau == eight[k].tau);
    CHECK(one[k].x_exit[0] == four[k].x_exit[0]);
    CHECK(one[k].n_steps == eight[k].n_steps);
  }
}

TEST_CASE("disjoint seeds give consistent exit-time distributions") {
  const auto dom = DomainSpec::interval(0.0, 1.0);
  const double x0 = 0.5;
  StepConfig step{1e-3, 0, true};
  const std::int64_t n = 100000;
  std::vector<double> a, b;
  a.reserve(n);
  b.reserve(n);
  for (const auto& s : sample_exit_batch(brownian1d(), dom, std::span{&x0, 1}, step, 1, n))
    a.push_back(s.tau);
  for (const auto& s : sample_exit_batch(brownian1d(), dom, std::span{&x0, 1}, step, 2, n))
    b.push_back(s.tau);
  CHECK(oracles::ks_distance(std::move(a), std::move(b)) < 0.02);
}

TEST_CASE("non-exiting dynamics truncate instead of hanging") {
  const auto dom = DomainSpec::interval(0.0, 1.0);
  const auto frozen = SdeSpec::constant_coefficients(1, {0.0}, {0.0});
  const double x0 = 0.5;
  StepConfig step{1e-3, 1000, true};
  RngStream rng(1, 0);
  const auto s = sample_exit(frozen, dom, std::span{&x0, 1}, step, rng);
  CHECK(s.truncated);
  CHECK(s.n_steps == 1000);
  CHECK(s.tau == doctest::Approx(1.0));
  CHECK(s.x_exit[0] == 0.5);  // still interior; consumers must not average it
}

TEST_CASE("2D ball: mean exit time from the center") {
  const auto bm2 = SdeSpec::standard_brownian(2);
  const auto ball = DomainSpec::ball({0.0, 0.0}, 1.0);
  const std::vector<double> c{0.0, 0.0};
  StepConfig step{1e-3, 0, true};
  const std::int64_t n = 5000;
  const auto batch = sample_exit_batch(bm2, ball, c, step, 11, n);
  std::vector<double> taus;
  double worst_radius = 0.0;
  for (const auto& s : batch) {
    taus.push_back(s.tau);
    worst_radius = std::max(worst_radius,
                            std::abs(std::hypot(s.x_exit[0], s.x_exit[1]) - 1.0));
  }
  CHECK(worst_radius < 1e-9);  // exits land on the sphere
  const auto ms = oracles::mean_stderr(taus);
  // E[tau] = (r^2 - |x|^2)/d = 1/2 at the center
  CHECK(std::abs(ms.mean - 0.5) <= 3.0 * ms.stderr_of_mean + 0.01);
}

TEST_CASE("generic indicator domain works without the bridge") {
  const auto generic = DomainSpec::generic(
      1, [](std::span<const double> x) { return x[0] > 0.0 && x[0] < 1.0; },
      BoundingBox{{0.0}, {1.0}});
  const double x0 = 0.5;
  StepConfig step{1e-3, 0, true};  // bridge requested but silently unavailable
  const std::int64_t n = 5000;
  const auto batch = sample_exit_batch(brownian1d(), generic, std::span{&x0, 1}, step, 7, n);
  std::vector<double> taus;
  for (const auto& s : batch) taus.push_back(s.tau);
  const auto ms = oracles::mean_stderr(taus);
  // no bridge: expect the +0.58 sqrt(h) overshoot on top of 0.25
  CHECK(std::abs(ms.mean - 0.25 - 0.5826 * std::sqrt(step.h)) <=
        3.0 * ms.stderr_of_mean + 5e-3);
}

}  // TEST_SUITE
