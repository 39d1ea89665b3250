#include "wavemc/sde.hpp"

#include <algorithm>
#include <cmath>

#include "wavemc/format.hpp"
#include "wavemc/rng.hpp"

namespace wavemc {

std::int64_t effective_max_steps(const StepConfig& step) {
  if (step.max_steps > 0) return step.max_steps;
  const double cap = std::min(1e8 / step.h, 1e9);
  return static_cast<std::int64_t>(cap);
}

void validate_step_config(const StepConfig& step) {
  if (!(step.h > 0.0) || !std::isfinite(step.h))
    throw ConfigError("step config: h must be positive and finite");
  if (step.max_steps < 0) throw ConfigError("step config: max_steps must be >= 1 (or 0 for the default)");
  if (effective_max_steps(step) < 1) throw ConfigError("step config: max_steps must be >= 1");
}

SdeSpec SdeSpec::constant_coefficients(int dim, std::vector<double> drift,
                                       std::vector<double> diffusion_row_major,
                                       std::string description) {
  if (dim < 1) throw ConfigError("sde: dim must be >= 1");
  const auto d = static_cast<std::size_t>(dim);
  if (drift.size() != d) throw ConfigError("sde: drift must have dim entries");
  if (diffusion_row_major.size() != d * d)
    throw ConfigError("sde: diffusion must have dim*dim entries");
  for (double v : drift)
    if (!std::isfinite(v)) throw ConfigError("sde: non-finite drift entry");
  for (double v : diffusion_row_major)
    if (!std::isfinite(v)) throw ConfigError("sde: non-finite diffusion entry");

  SdeSpec s;
  s.dim_ = dim;
  s.description_ = std::move(description);
  s.constant_ = true;
  s.drift_const_ = std::move(drift);
  s.diffusion_const_ = std::move(diffusion_row_major);
  s.drift_ = [values = s.drift_const_](std::span<const double>, std::span<double> out) {
    std::copy(values.begin(), values.end(), out.begin());
  };
  s.diffusion_ = [values = s.diffusion_const_](std::span<const double>, std::span<double> out) {
    std::copy(values.begin(), values.end(), out.begin());
  };
  return s;
}

SdeSpec SdeSpec::standard_brownian(int dim) {
  if (dim < 1) throw ConfigError("sde: dim must be >= 1");
  const auto d = static_cast<std::size_t>(dim);
  std::vector<double> sigma(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) sigma[i * d + i] = 1.0;
  return constant_coefficients(dim, std::vector<double>(d, 0.0), std::move(sigma),
                               "standard Brownian motion");
}

SdeSpec SdeSpec::linear_drift(int dim, std::vector<double> a_row_major,
                              std::vector<double> b0,
                              std::vector<double> diffusion_row_major,
                              std::string description) {
  if (dim < 1) throw ConfigError("sde: dim must be >= 1");
  const auto d = static_cast<std::size_t>(dim);
  if (a_row_major.size() != d * d) throw ConfigError("sde: A must have dim*dim entries");
  if (b0.size() != d) throw ConfigError("sde: b0 must have dim entries");
  if (diffusion_row_major.size() != d * d)
    throw ConfigError("sde: diffusion must have dim*dim entries");

  SdeSpec s;
  s.dim_ = dim;
  s.description_ = std::move(description);
  s.drift_ = [a = std::move(a_row_major), c = std::move(b0), d](
                 std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < d; ++i) {
      double v = c[i];
      for (std::size_t j = 0; j < d; ++j) v += a[i * d + j] * x[j];
      out[i] = v;
    }
  };
  s.diffusion_ = [values = std::move(diffusion_row_major)](std::span<const double>,
                                                           std::span<double> out) {
    std::copy(values.begin(), values.end(), out.begin());
  };
  return s;
}

SdeSpec SdeSpec::from_expressions(int dim, const std::vector<Expr>& drift,
                                  const std::vector<std::vector<Expr>>& diffusion,
                                  std::string description) {
  if (dim < 1) throw ConfigError("sde: dim must be >= 1");
  const auto d = static_cast<std::size_t>(dim);
  if (drift.size() != d) throw ConfigError("sde: drift needs one expression per component");
  if (diffusion.size() != d) throw ConfigError("sde: diffusion needs dim rows");
  for (const auto& row : diffusion)
    if (row.size() != d) throw ConfigError("sde: diffusion needs dim columns per row");

  auto check_real = [dim](const Expr& e, const char* what) {
    if (e.contains_z())
      throw ConfigError(std::string("sde: ") + what + " must not reference z");
    if (e.has_complex_constants())
      throw ConfigError(std::string("sde: ") + what + " must be real-valued");
    if (e.max_x_index() >= dim)
      throw ConfigError(std::string("sde: ") + what + " references x beyond dim");
  };
  for (const auto& e : drift) check_real(e, "drift");
  for (const auto& row : diffusion)
    for (const auto& e : row) check_real(e, "diffusion");

  // Fold to the constant fast path when every entry simplifies to a constant.
  bool all_const = true;
  std::vector<double> bc(d), sc(d * d);
  for (std::size_t i = 0; i < d && all_const; ++i) {
    const Expr s = drift[i].simplified();
    if (s.kind() == ExprKind::constant)
      bc[i] = s.node()->value.real();
    else
      all_const = false;
  }
  for (std::size_t i = 0; i < d && all_const; ++i)
    for (std::size_t j = 0; j < d && all_const; ++j) {
      const Expr s = diffusion[i][j].simplified();
      if (s.kind() == ExprKind::constant)
        sc[i * d + j] = s.node()->value.real();
      else
        all_const = false;
    }
  if (all_const) return constant_coefficients(dim, std::move(bc), std::move(sc), std::move(description));

  SdeSpec s;
  s.dim_ = dim;
  s.description_ = std::move(description);
  s.drift_ = [drift](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < drift.size(); ++i) out[i] = drift[i].eval({}, x).real();
  };
  s.diffusion_ = [diffusion, d](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] = diffusion[i][j].eval({}, x).real();
  };
  return s;
}

SdeSpec SdeSpec::from_callbacks(int dim, VectorFieldFn drift, MatrixFieldFn diffusion,
                                std::string description) {
  if (dim < 1) throw ConfigError("sde: dim must be >= 1");
  if (!drift || !diffusion) throw ConfigError("sde: callbacks must be non-null");
  SdeSpec s;
  s.dim_ = dim;
  s.description_ = std::move(description);
  s.drift_ = std::move(drift);
  s.diffusion_ = std::move(diffusion);
  return s;
}

void SdeSpec::eval_drift(std::span<const double> x, std::span<double> out) const {
  drift_(x, out);
}

void SdeSpec::eval_diffusion(std::span<const double> x, std::span<double> out) const {
  diffusion_(x, out);
}

void SdeSpec::validate_finite_on(const BoundingBox& box, int n_probes) const {
  if (box.dim() != dim_) throw ConfigError("sde: bounding box dim mismatch");
  const auto d = static_cast<std::size_t>(dim_);
  RngStream rng(0x5DEC0EF5ULL, 0, RngStream::Purpose::probes);
  std::vector<double> x(d), b(d), sig(d * d);
  for (int k = 0; k < n_probes; ++k) {
    for (std::size_t i = 0; i < d; ++i)
      x[i] = box.lo[i] + rng.uniform01() * (box.hi[i] - box.lo[i]);
    drift_(x, b);
    diffusion_(x, sig);
    for (std::size_t i = 0; i < d; ++i)
      if (!std::isfinite(b[i]))
        throw ConfigError("sde: drift component " + std::to_string(i + 1) +
                          " is non-finite at x1=" + format_double(x[0]));
    for (std::size_t i = 0; i < d * d; ++i)
      if (!std::isfinite(sig[i]))
        throw ConfigError("sde: diffusion entry " + std::to_string(i / d + 1) + "," +
                          std::to_string(i % d + 1) + " is non-finite at x1=" +
                          format_double(x[0]));
  }
}

std::vector<double> euler_step(std::span<const double> x, const SdeSpec& spec, double h,
                               std::span<const double> xi) {
  if (!(h > 0.0)) throw ConfigError("euler_step: h must be positive");
  const auto d = static_cast<std::size_t>(spec.dim());
  if (x.size() != d || xi.size() != d)
    throw ConfigError("euler_step: x and xi must have dim entries");

  std::vector<double> b(d), sig(d * d), out(d);
  spec.eval_drift(x, b);
  spec.eval_diffusion(x, sig);
  const double sqrt_h = std::sqrt(h);
  for (std::size_t i = 0; i < d; ++i) {
    double noise = 0.0;
    for (std::size_t j = 0; j < d; ++j) noise += sig[i * d + j] * xi[j];
    out[i] = x[i] + b[i] * h + sqrt_h * noise;
    if (!std::isfinite(out[i]))
      throw NumericalError("euler_step: coordinate x" + std::to_string(i + 1) +
                           " became non-finite");
  }
  return out;
}

double apply_generator(const std::function<double(std::span<const double>)>& u,
                       const SdeSpec& spec, std::span<const double> x, double fd_step) {
  if (!(fd_step > 0.0)) throw ConfigError("apply_generator: fd_step must be positive");
  const auto d = static_cast<std::size_t>(spec.dim());
  std::vector<double> b(d), sig(d * d), a(d * d);
  spec.eval_drift(x, b);
  spec.eval_diffusion(x, sig);
  // a = sigma sigma^T / 2
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += sig[i * d + k] * sig[j * d + k];
      a[i * d + j] = 0.5 * s;
    }

  std::vector<double> p(x.begin(), x.end());
  const double u0 = u(p);
  const double inv2h = 1.0 / (2.0 * fd_step);
  const double invh2 = 1.0 / (fd_step * fd_step);

  double result = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    p[i] = x[i] + fd_step;
    const double up = u(p);
    p[i] = x[i] - fd_step;
    const double um = u(p);
    p[i] = x[i];
    result += b[i] * (up - um) * inv2h;
    result += a[i * d + i] * (up - 2.0 * u0 + um) * invh2;
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const double aij = a[i * d + j] + a[j * d + i];  // symmetric pair
      if (aij == 0.0) continue;
      p[i] = x[i] + fd_step;
      p[j] = x[j] + fd_step;
      const double upp = u(p);
      p[j] = x[j] - fd_step;
      const double upm = u(p);
      p[i] = x[i] - fd_step;
      const double umm = u(p);
      p[j] = x[j] + fd_step;
      const double ump = u(p);
      p[i] = x[i];
      p[j] = x[j];
      result += aij * (upp - upm - ump + umm) * 0.25 * invh2;
    }
  if (!std::isfinite(result))
    throw NumericalError("apply_generator: non-finite value at the evaluation point");
  return result;
}

double default_fd_step(const BoundingBox& box) { return 1e-4 * box.diameter(); }

}  // namespace wavemc
