#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "wavemc/expr.hpp"

namespace {

using namespace wavemc;

void BM_Parse(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(parse_expr("exp(x1+z) + 0.5*z^2*x1 - sin(pi*x1)", 1));
}
BENCHMARK(BM_Parse);

void BM_Eval(benchmark::State& state) {
  const Expr e = parse_expr("exp(x1+z) + 0.5*z^2*x1 - sin(pi*x1)", 1);
  const Complex z(0.4, 0.2);
  const double x = 0.7;
  for (auto _ : state) benchmark::DoNotOptimize(e.eval(z, std::span{&x, 1}));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Eval);

void BM_DifferentiateZ(benchmark::State& state) {
  const Expr e = parse_expr("exp(x1+z) + 0.5*z^2*x1 - sin(pi*x1)", 1);
  for (auto _ : state) benchmark::DoNotOptimize(e.differentiate_z());
}
BENCHMARK(BM_DifferentiateZ);

void BM_CauchyDerivative(benchmark::State& state) {
  const Expr e = parse_expr("exp(x1+z)", 1);
  const Complex z(0.1, -0.3);
  const double x = 0.5;
  for (auto _ : state)
    benchmark::DoNotOptimize(cauchy_derivative(e, z, std::span{&x, 1}));
}
BENCHMARK(BM_CauchyDerivative);

}  // namespace
