#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wavemc/domain.hpp"
#include "wavemc/rng.hpp"
#include "wavemc/sde.hpp"

namespace wavemc {

enum class ExitVia {
  spatial_boundary,      // the path reached the boundary of D
  time_zero_convention,  // z = 0: the estimator's t = 0 special case
};

// One realization of the exit problem: the first exit time tau and the
// exit position X(tau). A truncated sample hit max_steps without exiting;
// its tau and x_exit are the values at truncation and must not enter
// averages.
struct ExitSample {
  double tau = 0.0;
  std::vector<double> x_exit;
  std::int64_t n_steps = 0;
  ExitVia exited_via = ExitVia::spatial_boundary;
  bool truncated = false;
};

// Simulates X from x0 until it leaves D. A start within boundary_tol of
// the boundary exits immediately with tau = 0 (regular boundary). Interior
// steps use Euler-Maruyama; the exit is detected either by a step landing
// outside D (tau interpolated to the sub-step crossing fraction) or, with
// step.bridge_correction, by a Brownian-bridge crossing test against the
// locally flattened boundary (tau at mid-step, exit at the boundary point
// nearest the step midpoint). The bridge correction needs a distance to
// the boundary, so it is skipped on generic indicator domains.
ExitSample sample_exit(const SdeSpec& spec, const DomainSpec& dom, std::span<const double> x0,
                       const StepConfig& step, RngStream& rng);

// n independent samples; sample k draws from RngStream(seed, k), so the
// result is identical for any worker count and is assembled in index
// order. Per-sample errors are rethrown with the failing index (the lowest
// one when several workers fail).
std::vector<ExitSample> sample_exit_batch(const SdeSpec& spec, const DomainSpec& dom,
                                          std::span<const double> x0, const StepConfig& step,
                                          std::uint64_t seed, std::int64_t n,
                                          unsigned threads = 0);

// The z = 0 convention: tau = 0 at an interior point, no simulation.
ExitSample time_zero_sample(std::span<const double> x0);

}  // namespace wavemc
