#include "wavemc/data_function.hpp"

#include <cmath>
#include <numbers>

#include "wavemc/domain.hpp"
#include "wavemc/format.hpp"
#include "wavemc/rng.hpp"

namespace wavemc {

namespace {

constexpr int kProbeCount = 20;
constexpr double kProbeRelTol = 1e-8;
constexpr std::uint64_t kProbeSeed = 0x77A7E51DULL;

Complex numeric_derivative(const DataFunction::EvalFn& f, Complex z,
                           std::span<const double> x, double rho, int m) {
  Complex acc(0.0, 0.0);
  for (int k = 0; k < m; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / m;
    const Complex w(std::cos(theta), std::sin(theta));
    acc += f(z + rho * w, x) * std::conj(w);
  }
  return acc / (rho * static_cast<double>(m));
}

}  // namespace

void DataFunction::validate_derivative() const {
  RngStream rng(kProbeSeed, 0, RngStream::Purpose::probes);
  std::vector<double> x(static_cast<std::size_t>(dim_));
  int checked = 0, attempts = 0;
  while (checked < kProbeCount && attempts < 4 * kProbeCount) {
    ++attempts;
    const Complex z(2.0 * rng.uniform01() - 1.0, 2.0 * rng.uniform01() - 1.0);
    for (auto& c : x) c = 2.0 * rng.uniform01() - 1.0;
    Complex numeric, symbolic;
    try {
      numeric = numeric_derivative(f_, z, x, 1e-2, 32);
      symbolic = df_dz_(z, x);
    } catch (const NumericalError&) {
      continue;  // probe hit a pole of a division node; try another point
    }
    const double scale = 1.0 + std::abs(symbolic);
    if (std::abs(numeric - symbolic) > kProbeRelTol * scale)
      throw ConfigError(
          "data function: df/dz disagrees with the Cauchy-integral derivative at z=(" +
          format_double(z.real()) + "," + format_double(z.imag()) + "): |" +
          format_double(std::abs(numeric - symbolic)) + "| > " + format_double(kProbeRelTol) +
          "*(1+|f'|)");
    ++checked;
  }
  if (checked < kProbeCount)
    throw ConfigError("data function: derivative validation could not find enough "
                      "evaluable probe points");
}

void DataFunction::probe_reflection_symmetry() {
  RngStream rng(kProbeSeed, 1, RngStream::Purpose::probes);
  std::vector<double> x(static_cast<std::size_t>(dim_));
  for (int k = 0; k < 100; ++k) {
    const Complex z(3.0 * rng.uniform01() - 1.5, 3.0 * rng.uniform01() - 1.5);
    for (auto& c : x) c = 2.0 * rng.uniform01() - 1.0;
    Complex fz, fconj;
    try {
      fz = f_(z, x);
      fconj = f_(std::conj(z), x);
    } catch (const NumericalError&) {
      continue;
    }
    if (std::abs(fconj - std::conj(fz)) > 1e-12 * (1.0 + std::abs(fz))) {
      reflection_symmetric_ = false;
      return;
    }
  }
  reflection_symmetric_ = true;
}

DataFunction DataFunction::from_expression(Expr f, int dim) {
  return from_expression(f, f.differentiate_z(), dim);
}

DataFunction DataFunction::from_expression(Expr f, Expr df_dz, int dim) {
  if (dim < 1) throw ConfigError("data function: dim must be >= 1");
  if (f.max_x_index() >= dim || df_dz.max_x_index() >= dim)
    throw ConfigError("data function: expression references x beyond dim=" +
                      std::to_string(dim));
  DataFunction d;
  d.dim_ = dim;
  d.f_ast_ = f;
  d.df_ast_ = df_dz;
  d.f_ = [f](Complex z, std::span<const double> x) { return f.eval(z, x); };
  d.df_dz_ = [df_dz](Complex z, std::span<const double> x) { return df_dz.eval(z, x); };
  d.entirety_warning_ = f.divides_by_z();
  d.validate_derivative();
  d.probe_reflection_symmetry();
  return d;
}

DataFunction DataFunction::from_text(std::string_view f_text, int dim) {
  return from_expression(parse_expr(f_text, dim), dim);
}

DataFunction DataFunction::from_callbacks(EvalFn f, EvalFn df_dz, int dim) {
  if (dim < 1) throw ConfigError("data function: dim must be >= 1");
  if (!f || !df_dz) throw ConfigError("data function: callbacks must be non-null");
  DataFunction d;
  d.dim_ = dim;
  d.f_ = std::move(f);
  d.df_dz_ = std::move(df_dz);
  d.validate_derivative();
  d.probe_reflection_symmetry();
  return d;
}

DataFunction augment_velocity(const DataFunction& f, const Expr& phi, const DomainSpec* dom,
                              std::vector<std::string>* warnings) {
  if (phi.contains_z())
    throw ConfigError("augment_velocity: phi must not reference z");
  if (phi.max_x_index() >= f.dim())
    throw ConfigError("augment_velocity: phi references x beyond dim=" +
                      std::to_string(f.dim()));

  if (dom != nullptr) {
    if (dom->dim() != f.dim())
      throw ConfigError("augment_velocity: domain dim mismatch");
    double worst = 0.0;
    for (const auto& p : dom->sample_boundary_points(100, /*seed=*/17))
      worst = std::max(worst, std::abs(phi.eval({}, p)));
    if (worst > 1e-10 && warnings != nullptr)
      warnings->push_back("phi does not vanish on the boundary (max |phi| = " +
                          format_double(worst) +
                          " over 100 sampled boundary points); the added term changes "
                          "boundary data, not just the initial velocity");
  }

  if (f.f_expr().has_value()) {
    const Expr f1 = (*f.f_expr() + Expr::z() * phi).simplified();
    const Expr df1 = (*f.df_dz_expr() + phi).simplified();
    return DataFunction::from_expression(f1, df1, f.dim());
  }
  // Callback-backed: wrap.
  auto base_f = [f](Complex z, std::span<const double> x) { return f.eval(z, x); };
  auto base_df = [f](Complex z, std::span<const double> x) { return f.eval_dz(z, x); };
  auto f1 = [base_f, phi](Complex z, std::span<const double> x) {
    return base_f(z, x) + z * phi.eval(z, x);
  };
  auto df1 = [base_df, phi](Complex z, std::span<const double> x) {
    return base_df(z, x) + phi.eval(z, x);
  };
  return DataFunction::from_callbacks(f1, df1, f.dim());
}

bool check_reflection_symmetry(const DataFunction& f, const DomainSpec& dom) {
  if (f.dim() != dom.dim())
    throw ConfigError("check_reflection_symmetry: dimension mismatch");
  RngStream rng(kProbeSeed, 2, RngStream::Purpose::probes);
  const auto& box = dom.bounding_box();
  std::vector<double> x(static_cast<std::size_t>(f.dim()));
  for (int k = 0; k < 100; ++k) {
    const Complex z(3.0 * rng.uniform01() - 1.5, 3.0 * rng.uniform01() - 1.5);
    for (int i = 0; i < f.dim(); ++i)
      x[static_cast<std::size_t>(i)] =
          box.lo[static_cast<std::size_t>(i)] +
          rng.uniform01() * (box.hi[static_cast<std::size_t>(i)] - box.lo[static_cast<std::size_t>(i)]);
    Complex fz, fconj;
    try {
      fz = f.eval(z, x);
      fconj = f.eval(std::conj(z), x);
    } catch (const NumericalError&) {
      continue;
    }
    if (std::abs(fconj - std::conj(fz)) > 1e-12 * (1.0 + std::abs(fz))) return false;
  }
  return true;
}

}  // namespace wavemc
