#include <benchmark/benchmark.h>

#include "wavemc/estimator.hpp"
#include "wavemc/exit_sampler.hpp"

namespace {

using namespace wavemc;

void BM_GaussianStream(benchmark::State& state) {
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.gaussian());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GaussianStream);

// One exit path on (0,1) from 0.5; items = Euler steps taken.
void BM_ExitSampleInterval(benchmark::State& state) {
  const auto bm = SdeSpec::standard_brownian(1);
  const auto dom = DomainSpec::interval(0.0, 1.0);
  const double h = 1.0 / static_cast<double>(state.range(0));
  const StepConfig step{h, 0, state.range(1) != 0};
  const double x0 = 0.5;
  std::uint64_t stream = 0;
  std::int64_t steps = 0;
  for (auto _ : state) {
    RngStream rng(7, stream++);
    const auto s = sample_exit(bm, dom, std::span{&x0, 1}, step, rng);
    steps += s.n_steps;
    benchmark::DoNotOptimize(s.tau);
  }
  state.SetItemsProcessed(steps);
}
BENCHMARK(BM_ExitSampleInterval)
    ->ArgsProduct({{1000, 10000}, {0, 1}})
    ->ArgNames({"inv_h", "bridge"});

void BM_ExitSampleBall2D(benchmark::State& state) {
  const auto bm2 = SdeSpec::standard_brownian(2);
  const auto ball = DomainSpec::ball({0.0, 0.0}, 1.0);
  const StepConfig step{1e-3, 0, true};
  const std::vector<double> c{0.0, 0.0};
  std::uint64_t stream = 0;
  std::int64_t steps = 0;
  for (auto _ : state) {
    RngStream rng(7, stream++);
    const auto s = sample_exit(bm2, ball, c, step, rng);
    steps += s.n_steps;
    benchmark::DoNotOptimize(s.tau);
  }
  state.SetItemsProcessed(steps);
}
BENCHMARK(BM_ExitSampleBall2D);

// Whole-estimate cost including the Z stream and the reduction.
void BM_EstimateU(benchmark::State& state) {
  const auto bm = SdeSpec::standard_brownian(1);
  const auto dom = DomainSpec::interval(0.0, 1.0);
  const auto f = DataFunction::from_text("exp(x1+z)", 1);
  EstimatorConfig cfg;
  cfg.n_samples = state.range(0);
  cfg.antithetic = true;
  cfg.step = StepConfig{1e-3, 0, true};
  const double x = 0.5;
  for (auto _ : state) {
    cfg.seed++;
    benchmark::DoNotOptimize(estimate_u(f, bm, dom, 0.5, std::span{&x, 1}, cfg).mean);
  }
  state.SetItemsProcessed(state.iterations() * cfg.n_samples);
}
BENCHMARK(BM_EstimateU)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
