#include "wavemc/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "wavemc/rng.hpp"

namespace wavemc {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

double BoundingBox::diameter() const {
  double s = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
  return std::sqrt(s);
}

bool BoundingBox::contains(std::span<const double> x) const {
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

DomainSpec DomainSpec::interval(double a, double b, double boundary_tol) {
  require(a < b, "interval: requires a < b");
  require(boundary_tol > 0.0, "interval: boundary_tol must be positive");
  DomainSpec d;
  d.shape_ = Interval{a, b};
  d.dim_ = 1;
  d.boundary_tol_ = boundary_tol;
  d.bbox_ = {{a}, {b}};
  d.center_ = {0.5 * (a + b)};
  return d;
}

DomainSpec DomainSpec::box(std::vector<double> lo, std::vector<double> hi,
                           double boundary_tol) {
  require(!lo.empty() && lo.size() == hi.size(), "box: lo and hi must have equal dim >= 1");
  require(boundary_tol > 0.0, "box: boundary_tol must be positive");
  for (std::size_t i = 0; i < lo.size(); ++i)
    require(lo[i] < hi[i], "box: requires lo < hi componentwise");
  DomainSpec d;
  d.dim_ = static_cast<int>(lo.size());
  d.bbox_ = {lo, hi};
  d.center_.resize(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) d.center_[i] = 0.5 * (lo[i] + hi[i]);
  d.shape_ = Box{std::move(lo), std::move(hi)};
  d.boundary_tol_ = boundary_tol;
  return d;
}

DomainSpec DomainSpec::ball(std::vector<double> center, double radius, double boundary_tol) {
  require(!center.empty(), "ball: center must have dim >= 1");
  require(radius > 0.0, "ball: radius must be positive");
  require(boundary_tol > 0.0, "ball: boundary_tol must be positive");
  DomainSpec d;
  d.dim_ = static_cast<int>(center.size());
  d.bbox_.lo.resize(center.size());
  d.bbox_.hi.resize(center.size());
  for (std::size_t i = 0; i < center.size(); ++i) {
    d.bbox_.lo[i] = center[i] - radius;
    d.bbox_.hi[i] = center[i] + radius;
  }
  d.center_ = center;
  d.shape_ = Ball{std::move(center), radius};
  d.boundary_tol_ = boundary_tol;
  return d;
}

DomainSpec DomainSpec::generic(int dim, Indicator inside, BoundingBox bounding_box,
                               std::optional<std::vector<double>> interior_point,
                               double boundary_tol) {
  require(dim >= 1, "generic: dim must be >= 1");
  require(static_cast<int>(bounding_box.lo.size()) == dim &&
              static_cast<int>(bounding_box.hi.size()) == dim,
          "generic: bounding box dim mismatch");
  require(boundary_tol > 0.0, "generic: boundary_tol must be positive");
  for (int i = 0; i < dim; ++i)
    require(bounding_box.lo[i] < bounding_box.hi[i], "generic: bounding box must be nonempty");
  DomainSpec d;
  d.dim_ = dim;
  d.bbox_ = bounding_box;
  if (interior_point) {
    require(static_cast<int>(interior_point->size()) == dim,
            "generic: interior point dim mismatch");
    d.center_ = std::move(*interior_point);
  } else {
    d.center_.resize(dim);
    for (int i = 0; i < dim; ++i) d.center_[i] = 0.5 * (bounding_box.lo[i] + bounding_box.hi[i]);
  }
  require(inside(d.center_), "generic: representative interior point is not inside the domain");
  d.shape_ = Generic{std::move(inside)};
  d.boundary_tol_ = boundary_tol;
  return d;
}

bool DomainSpec::is_generic() const noexcept {
  return std::holds_alternative<Generic>(shape_);
}

std::optional<double> DomainSpec::signed_distance(std::span<const double> x) const {
  if (const auto* iv = std::get_if<Interval>(&shape_))
    return std::min(x[0] - iv->a, iv->b - x[0]);
  if (const auto* bx = std::get_if<Box>(&shape_)) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bx->lo.size(); ++i)
      d = std::min(d, std::min(x[i] - bx->lo[i], bx->hi[i] - x[i]));
    return d;
  }
  if (const auto* bl = std::get_if<Ball>(&shape_)) {
    double s = 0.0;
    for (std::size_t i = 0; i < bl->center.size(); ++i) {
      const double dx = x[i] - bl->center[i];
      s += dx * dx;
    }
    return bl->radius - std::sqrt(s);
  }
  return std::nullopt;
}

bool DomainSpec::contains(std::span<const double> x) const {
  if (const auto* g = std::get_if<Generic>(&shape_))
    return bbox_.contains(x) && g->inside(x);
  return *signed_distance(x) > boundary_tol_;
}

bool DomainSpec::on_boundary(std::span<const double> x) const {
  if (std::holds_alternative<Generic>(shape_)) return !contains(x);
  return std::abs(*signed_distance(x)) <= boundary_tol_;
}

bool DomainSpec::in_closure(std::span<const double> x) const {
  if (std::holds_alternative<Generic>(shape_)) return true;  // user obligation
  return *signed_distance(x) >= -boundary_tol_;
}

std::optional<BoundaryProximity> DomainSpec::nearest_boundary(std::span<const double> x) const {
  BoundaryProximity p;
  p.normal.assign(x.size(), 0.0);
  p.nearest_point.assign(x.begin(), x.end());
  if (const auto* iv = std::get_if<Interval>(&shape_)) {
    if (x[0] - iv->a <= iv->b - x[0]) {
      p.distance = x[0] - iv->a;
      p.normal[0] = -1.0;
      p.nearest_point[0] = iv->a;
    } else {
      p.distance = iv->b - x[0];
      p.normal[0] = 1.0;
      p.nearest_point[0] = iv->b;
    }
    return p;
  }
  if (const auto* bx = std::get_if<Box>(&shape_)) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t axis = 0;
    double sign = 1.0, face = 0.0;
    for (std::size_t i = 0; i < bx->lo.size(); ++i) {
      if (x[i] - bx->lo[i] < best) {
        best = x[i] - bx->lo[i];
        axis = i;
        sign = -1.0;
        face = bx->lo[i];
      }
      if (bx->hi[i] - x[i] < best) {
        best = bx->hi[i] - x[i];
        axis = i;
        sign = 1.0;
        face = bx->hi[i];
      }
    }
    p.distance = best;
    p.normal[axis] = sign;
    p.nearest_point[axis] = face;
    return p;
  }
  if (const auto* bl = std::get_if<Ball>(&shape_)) {
    std::vector<double> r(x.size());
    double n = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      r[i] = x[i] - bl->center[i];
      n += r[i] * r[i];
    }
    n = std::sqrt(n);
    if (n == 0.0) {
      p.distance = bl->radius;
      p.normal[0] = 1.0;  // direction is arbitrary from the exact center
    } else {
      p.distance = bl->radius - n;
      for (std::size_t i = 0; i < x.size(); ++i) p.normal[i] = r[i] / n;
    }
    for (std::size_t i = 0; i < x.size(); ++i)
      p.nearest_point[i] = bl->center[i] + bl->radius * p.normal[i];
    return p;
  }
  return std::nullopt;
}

bool DomainSpec::nearest_boundary_into(std::span<const double> x, double& distance,
                                       std::span<double> normal) const {
  if (const auto* iv = std::get_if<Interval>(&shape_)) {
    if (x[0] - iv->a <= iv->b - x[0]) {
      distance = x[0] - iv->a;
      normal[0] = -1.0;
    } else {
      distance = iv->b - x[0];
      normal[0] = 1.0;
    }
    return true;
  }
  if (const auto* bx = std::get_if<Box>(&shape_)) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t axis = 0;
    double sign = 1.0;
    for (std::size_t i = 0; i < bx->lo.size(); ++i) {
      normal[i] = 0.0;
      if (x[i] - bx->lo[i] < best) {
        best = x[i] - bx->lo[i];
        axis = i;
        sign = -1.0;
      }
      if (bx->hi[i] - x[i] < best) {
        best = bx->hi[i] - x[i];
        axis = i;
        sign = 1.0;
      }
    }
    distance = best;
    normal[axis] = sign;
    return true;
  }
  if (const auto* bl = std::get_if<Ball>(&shape_)) {
    double n = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      normal[i] = x[i] - bl->center[i];
      n += normal[i] * normal[i];
    }
    n = std::sqrt(n);
    if (n == 0.0) {
      distance = bl->radius;
      for (auto& c : normal) c = 0.0;
      normal[0] = 1.0;
    } else {
      distance = bl->radius - n;
      for (auto& c : normal) c /= n;
    }
    return true;
  }
  return false;
}

BoundaryCrossing DomainSpec::boundary_crossing(std::span<const double> x_in,
                                               std::span<const double> x_out) const {
  BoundaryCrossing c;
  c.x_hit.assign(x_in.begin(), x_in.end());

  if (const auto* iv = std::get_if<Interval>(&shape_)) {
    const double dx = x_out[0] - x_in[0];
    double lambda = 1.0, hit = x_out[0];
    if (x_out[0] >= iv->b) {
      lambda = (iv->b - x_in[0]) / dx;
      hit = iv->b;
    } else if (x_out[0] <= iv->a) {
      lambda = (iv->a - x_in[0]) / dx;
      hit = iv->a;
    } else {
      hit = (iv->b - x_out[0] < x_out[0] - iv->a) ? iv->b : iv->a;  // tolerance band
    }
    c.lambda = std::min(lambda, 1.0);
    c.x_hit[0] = hit;
    return c;
  }

  if (const auto* bx = std::get_if<Box>(&shape_)) {
    double lambda = std::numeric_limits<double>::infinity();
    std::size_t axis = 0;
    double face = 0.0;
    for (std::size_t i = 0; i < bx->lo.size(); ++i) {
      const double dx = x_out[i] - x_in[i];
      if (x_out[i] >= bx->hi[i] && dx > 0.0) {
        const double l = (bx->hi[i] - x_in[i]) / dx;
        if (l < lambda) {
          lambda = l;
          axis = i;
          face = bx->hi[i];
        }
      } else if (x_out[i] <= bx->lo[i] && dx < 0.0) {
        const double l = (bx->lo[i] - x_in[i]) / dx;
        if (l < lambda) {
          lambda = l;
          axis = i;
          face = bx->lo[i];
        }
      }
    }
    if (!std::isfinite(lambda)) {
      // x_out sits in the tolerance band: snap its nearest face.
      const auto prox = nearest_boundary(x_out);
      c.lambda = 1.0;
      c.x_hit.assign(prox->nearest_point.begin(), prox->nearest_point.end());
      return c;
    }
    c.lambda = std::min(lambda, 1.0);
    for (std::size_t i = 0; i < x_in.size(); ++i)
      c.x_hit[i] = x_in[i] + c.lambda * (x_out[i] - x_in[i]);
    c.x_hit[axis] = face;
    return c;
  }

  if (const auto* bl = std::get_if<Ball>(&shape_)) {
    // |p + lambda d|^2 = r^2 with p = x_in - center, d = x_out - x_in.
    double c2 = 0.0, c1 = 0.0, c0 = -bl->radius * bl->radius;
    for (std::size_t i = 0; i < x_in.size(); ++i) {
      const double pi = x_in[i] - bl->center[i];
      const double di = x_out[i] - x_in[i];
      c2 += di * di;
      c1 += pi * di;
      c0 += pi * pi;
    }
    const double disc = std::max(c1 * c1 - c2 * c0, 0.0);
    const double root = std::sqrt(disc);
    const double lambda = c1 > 0.0 ? -c0 / (c1 + root) : (root - c1) / c2;
    c.lambda = std::min(std::max(lambda, 0.0), 1.0);
    double n = 0.0;
    for (std::size_t i = 0; i < x_in.size(); ++i) {
      c.x_hit[i] = x_in[i] + c.lambda * (x_out[i] - x_in[i]) - bl->center[i];
      n += c.x_hit[i] * c.x_hit[i];
    }
    n = std::sqrt(n);
    if (n > 0.0) {
      for (std::size_t i = 0; i < x_in.size(); ++i)
        c.x_hit[i] = bl->center[i] + bl->radius * c.x_hit[i] / n;
    } else {
      c.x_hit.assign(bl->center.begin(), bl->center.end());
      c.x_hit[0] += bl->radius;
    }
    return c;
  }

  // Generic: bisection on the indicator.
  const auto& g = std::get<Generic>(shape_);
  double seg = 0.0;
  for (std::size_t i = 0; i < x_in.size(); ++i)
    seg += (x_out[i] - x_in[i]) * (x_out[i] - x_in[i]);
  seg = std::sqrt(seg);
  double lo = 0.0, hi = 1.0;
  std::vector<double> mid(x_in.size());
  int iter = 0;
  while ((hi - lo) * seg > boundary_tol_) {
    if (++iter > 100)
      throw GeometryError("boundary_crossing: bisection did not converge in 100 iterations "
                          "(pathological indicator?)");
    const double m = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < x_in.size(); ++i)
      mid[i] = x_in[i] + m * (x_out[i] - x_in[i]);
    if (bbox_.contains(mid) && g.inside(mid))
      lo = m;
    else
      hi = m;
  }
  c.lambda = hi;
  for (std::size_t i = 0; i < x_in.size(); ++i)
    c.x_hit[i] = x_in[i] + hi * (x_out[i] - x_in[i]);
  return c;
}

std::vector<std::vector<double>> DomainSpec::sample_boundary_points(int n,
                                                                    std::uint64_t seed) const {
  std::vector<std::vector<double>> pts;
  if (n <= 0) return pts;
  pts.reserve(static_cast<std::size_t>(n));
  RngStream rng(seed, 0, RngStream::Purpose::probes);

  if (const auto* iv = std::get_if<Interval>(&shape_)) {
    for (int k = 0; k < n; ++k) pts.push_back({k % 2 == 0 ? iv->a : iv->b});
    return pts;
  }
  if (const auto* bx = std::get_if<Box>(&shape_)) {
    const std::size_t d = bx->lo.size();
    for (int k = 0; k < n; ++k) {
      std::vector<double> p(d);
      for (std::size_t i = 0; i < d; ++i)
        p[i] = bx->lo[i] + rng.uniform01() * (bx->hi[i] - bx->lo[i]);
      const std::size_t axis = static_cast<std::size_t>(k) % d;
      p[axis] = (k / d) % 2 == 0 ? bx->lo[axis] : bx->hi[axis];
      pts.push_back(std::move(p));
    }
    return pts;
  }
  if (const auto* bl = std::get_if<Ball>(&shape_)) {
    const std::size_t d = bl->center.size();
    for (int k = 0; k < n; ++k) {
      std::vector<double> u(d);
      double norm = 0.0;
      do {
        for (auto& c : u) c = rng.gaussian();
        norm = norm2(u);
      } while (norm == 0.0);
      std::vector<double> p(d);
      for (std::size_t i = 0; i < d; ++i) p[i] = bl->center[i] + bl->radius * u[i] / norm;
      pts.push_back(std::move(p));
    }
    return pts;
  }
  return pts;  // generic: no parametrization available
}

double bridge_exit_probability(double d_in, double d_next, double sigma_eff, double h) {
  if (sigma_eff <= 0.0) throw std::domain_error("bridge_exit_probability: sigma_eff must be positive");
  if (h <= 0.0) throw std::domain_error("bridge_exit_probability: h must be positive");
  if (d_in < 0.0 || d_next < 0.0)
    throw std::domain_error("bridge_exit_probability: distances must be nonnegative");
  return std::exp(-2.0 * d_in * d_next / (sigma_eff * sigma_eff * h));
}

}  // namespace wavemc
