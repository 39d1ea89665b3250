#pragma once

#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "wavemc/errors.hpp"

namespace wavemc {

struct BoundingBox {
  std::vector<double> lo, hi;

  int dim() const noexcept { return static_cast<int>(lo.size()); }
  double diameter() const;
  bool contains(std::span<const double> x) const;
};

struct BoundaryCrossing {
  double lambda = 0.0;          // in (0,1]
  std::vector<double> x_hit;    // x_in + lambda*(x_out - x_in), snapped to the boundary
};

struct BoundaryProximity {
  double distance = 0.0;             // to the nearest boundary point
  std::vector<double> normal;        // unit direction from x toward it
  std::vector<double> nearest_point;
};

// Bounded open connected spatial domain. Membership is strict: points
// within boundary_tol of the boundary count as boundary (exit), which is
// the discrete analogue of a regular boundary where the exit time from a
// boundary start is zero.
class DomainSpec {
 public:
  static constexpr double kDefaultBoundaryTol = 1e-12;

  using Indicator = std::function<bool(std::span<const double>)>;

  // Inert placeholder; assign from one of the factories before use.
  DomainSpec() = default;

  static DomainSpec interval(double a, double b, double boundary_tol = kDefaultBoundaryTol);
  static DomainSpec box(std::vector<double> lo, std::vector<double> hi,
                        double boundary_tol = kDefaultBoundaryTol);
  static DomainSpec ball(std::vector<double> center, double radius,
                         double boundary_tol = kDefaultBoundaryTol);

  // Arbitrary indicator with a user-asserted bounding box. The caller is
  // responsible for boundary regularity (a C1 boundary suffices) and
  // connectedness; neither is checkable from an indicator. No distance
  // field exists, so the bridge correction is unavailable on these.
  static DomainSpec generic(int dim, Indicator inside, BoundingBox bounding_box,
                            std::optional<std::vector<double>> interior_point = std::nullopt,
                            double boundary_tol = kDefaultBoundaryTol);

  int dim() const noexcept { return dim_; }
  double boundary_tol() const noexcept { return boundary_tol_; }
  const BoundingBox& bounding_box() const noexcept { return bbox_; }
  const std::vector<double>& center() const noexcept { return center_; }
  bool is_generic() const noexcept;

  // Strict interior; points within boundary_tol of the boundary are false.
  bool contains(std::span<const double> x) const;

  // Within boundary_tol of the boundary (generic: indicator false).
  bool on_boundary(std::span<const double> x) const;

  bool in_closure(std::span<const double> x) const;

  // Positive inside, negative outside; analytic for the built-in shapes,
  // absent for generic domains.
  std::optional<double> signed_distance(std::span<const double> x) const;

  // Distance and exit direction to the nearest boundary point; built-in
  // shapes only.
  std::optional<BoundaryProximity> nearest_boundary(std::span<const double> x) const;

  // Allocation-free variant for the sampling loop: fills the unit normal
  // toward the nearest boundary and returns the distance. False for
  // generic domains (normal untouched).
  bool nearest_boundary_into(std::span<const double> x, double& distance,
                             std::span<double> normal) const;

  // Locates the boundary on the segment x_in -> x_out. Analytic
  // segment-boundary intersection for interval/box/ball; bisection to
  // boundary_tol for generic domains (GeometryError after 100 iterations).
  BoundaryCrossing boundary_crossing(std::span<const double> x_in,
                                     std::span<const double> x_out) const;

  // n points on the boundary (built-in shapes only; empty for generic).
  std::vector<std::vector<double>> sample_boundary_points(int n, std::uint64_t seed) const;

 private:
  struct Interval {
    double a, b;
  };
  struct Box {
    std::vector<double> lo, hi;
  };
  struct Ball {
    std::vector<double> center;
    double radius;
  };
  struct Generic {
    Indicator inside;
  };

  std::variant<Interval, Box, Ball, Generic> shape_;
  int dim_ = 1;
  double boundary_tol_ = kDefaultBoundaryTol;
  BoundingBox bbox_;
  std::vector<double> center_;
};

// Probability that a Brownian bridge between two interior points, at
// distances d_in and d_next from a locally flattened boundary, crossed it
// during a step of length h: exp(-2*d_in*d_next / (sigma_eff^2 * h)).
// sigma_eff is the one-dimensional diffusion scale toward the boundary.
double bridge_exit_probability(double d_in, double d_next, double sigma_eff, double h);

}  // namespace wavemc
