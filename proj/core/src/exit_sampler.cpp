#include "wavemc/exit_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "parallel_util.hpp"

namespace wavemc {

namespace {

// Pre-resolved stepping kernel. Constant coefficients (the common case:
// the paper's scenarios are Brownian motion) skip the field evaluation and
// use cached b*h and sigma.
struct Stepper {
  const SdeSpec& spec;
  double h, sqrt_h;
  std::size_t d;
  bool constant;
  std::vector<double> bh;     // b*h when constant
  std::vector<double> sigma;  // last sigma used (cached constant or per-step eval)
  std::vector<double> eb;     // drift scratch
  double sigma_frob2 = 0.0;   // Frobenius norm^2 of `sigma`

  Stepper(const SdeSpec& s, double step_h)
      : spec(s),
        h(step_h),
        sqrt_h(std::sqrt(step_h)),
        d(static_cast<std::size_t>(s.dim())),
        constant(s.constant_coefficients_p()) {
    eb.resize(d);
    if (constant) {
      bh.assign(s.constant_drift().begin(), s.constant_drift().end());
      for (auto& v : bh) v *= h;
      sigma.assign(s.constant_diffusion().begin(), s.constant_diffusion().end());
      for (double v : sigma) sigma_frob2 += v * v;
    } else {
      sigma.resize(d * d);
    }
  }

  void advance(std::span<const double> x, std::span<const double> xi, std::span<double> out) {
    if (!constant) {
      spec.eval_drift(x, eb);
      spec.eval_diffusion(x, sigma);
      sigma_frob2 = 0.0;
      for (double v : sigma) sigma_frob2 += v * v;
    }
    for (std::size_t i = 0; i < d; ++i) {
      double noise = 0.0;
      const double* row = sigma.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) noise += row[j] * xi[j];
      out[i] = x[i] + (constant ? bh[i] : eb[i] * h) + sqrt_h * noise;
      if (!std::isfinite(out[i]))
        throw NumericalError("exit path: coordinate x" + std::to_string(i + 1) +
                             " became non-finite");
    }
  }

  // ||sigma^T n||: one-dimensional diffusion scale along the unit normal.
  double sigma_along(std::span<const double> normal) const {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double c = 0.0;
      for (std::size_t j = 0; j < d; ++j) c += sigma[j * d + i] * normal[j];
      s += c * c;
    }
    return std::sqrt(s);
  }
};

}  // namespace

ExitSample time_zero_sample(std::span<const double> x0) {
  ExitSample s;
  s.x_exit.assign(x0.begin(), x0.end());
  s.exited_via = ExitVia::time_zero_convention;
  return s;
}

ExitSample sample_exit(const SdeSpec& spec, const DomainSpec& dom, std::span<const double> x0,
                       const StepConfig& step, RngStream& rng) {
  const auto d = static_cast<std::size_t>(spec.dim());
  if (dom.dim() != spec.dim()) throw ConfigError("sample_exit: domain/sde dim mismatch");
  if (x0.size() != d) throw ConfigError("sample_exit: x0 must have dim entries");
  validate_step_config(step);
  if (!dom.in_closure(x0))
    throw ConfigError("sample_exit: x0 is outside the closure of the domain");

  ExitSample out;
  if (!dom.contains(x0)) {  // on or within tolerance of the boundary: tau = 0
    out.x_exit.assign(x0.begin(), x0.end());
    return out;
  }

  const std::int64_t max_steps = effective_max_steps(step);
  const double h = step.h;
  const double tol = dom.boundary_tol();
  const bool generic = dom.is_generic();
  Stepper stepper(spec, h);

  std::vector<double> cur(x0.begin(), x0.end());
  std::vector<double> nxt(d), xi(d), normal(d);
  const bool bridge = step.bridge_correction && !generic;
  double d_in = bridge ? *dom.signed_distance(cur) : 0.0;

  for (std::int64_t n = 1; n <= max_steps; ++n) {
    rng.gaussian_vector(xi);
    stepper.advance(cur, xi, nxt);

    // one distance evaluation serves both the membership test and the
    // bridge-crossing probability
    const double d_next = generic ? (dom.contains(nxt) ? tol * 2.0 : 0.0)
                                  : *dom.signed_distance(nxt);
    if (d_next <= tol) {
      BoundaryCrossing cr = dom.boundary_crossing(cur, nxt);
      out.tau = (static_cast<double>(n - 1) + cr.lambda) * h;
      out.x_exit = std::move(cr.x_hit);
      out.n_steps = n;
      return out;
    }

    if (bridge) {
      // The crossing probability is at most exp(-2 d_in d_next / (F^2 h))
      // with F the Frobenius norm of sigma; skip the test when that bound
      // is below e^-40.
      if (2.0 * d_in * d_next <= 40.0 * stepper.sigma_frob2 * h) {
        double dist = 0.0;
        dom.nearest_boundary_into(cur, dist, normal);
        const double sigma_eff = stepper.sigma_along(normal);
        if (sigma_eff > 0.0) {
          const double p = bridge_exit_probability(d_in, d_next, sigma_eff, h);
          if (rng.uniform01() < p) {
            // Crossing happened inside the step; the monitoring instant n*h
            // is the detection time, the boundary point nearest the step
            // midpoint the exit position.
            for (std::size_t i = 0; i < d; ++i) nxt[i] = 0.5 * (cur[i] + nxt[i]);
            const auto prox = dom.nearest_boundary(nxt);
            out.tau = static_cast<double>(n) * h;
            out.x_exit = prox->nearest_point;
            out.n_steps = n;
            return out;
          }
        }
      }
      d_in = d_next;
    }
    std::swap(cur, nxt);
  }

  out.tau = static_cast<double>(max_steps) * h;
  out.x_exit = std::move(cur);
  out.n_steps = max_steps;
  out.truncated = true;
  return out;
}

std::vector<ExitSample> sample_exit_batch(const SdeSpec& spec, const DomainSpec& dom,
                                          std::span<const double> x0, const StepConfig& step,
                                          std::uint64_t seed, std::int64_t n,
                                          unsigned threads) {
  if (n < 1) throw ConfigError("sample_exit_batch: n must be >= 1");
  std::vector<ExitSample> out(static_cast<std::size_t>(n));
  detail::parallel_indexed(n, threads, [&](std::int64_t k) {
    RngStream rng(seed, static_cast<std::uint64_t>(k));
    out[static_cast<std::size_t>(k)] = sample_exit(spec, dom, x0, step, rng);
  });
  return out;
}

}  // namespace wavemc
