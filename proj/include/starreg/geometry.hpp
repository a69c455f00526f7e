#pragma once

// Sphere partitions, star bodies given by their gauge on a sector grid, and
// the volume / gauge / mixed-volume functionals built on them.

#include <numbers>
#include <span>
#include <vector>

namespace starreg {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const;
  // Polar angle in [0, 2*pi).
  double angle() const;
  Point2 operator*(double c) const { return {x * c, y * c}; }
  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  bool operator==(const Point2&) const = default;
};

Point2 unit_vector(double angle);
double distance(const Point2& a, const Point2& b);
// Wraps an angle difference into [0, pi].
double geodesic_angle(double a, double b);

// Ordered partition of the unit circle into arcs [theta_i - w_i/2, theta_i + w_i/2].
// A point on the boundary of two arcs belongs to the one with the lower index.
//
// `dim` is carried so that volume-type functionals stay dimension generic; a
// caller with a custom partition of S^{d-1} may pass its own weights and
// treat `angles` as sector labels. Sector lookup by angle needs dim == 2.
class SphereGrid {
 public:
  SphereGrid(std::vector<double> angles, std::vector<double> weights, int dim = 2);

  std::size_t size() const { return angles_.size(); }
  int dim() const { return dim_; }
  std::span<const double> angles() const { return angles_; }
  std::span<const double> weights() const { return weights_; }
  double angle(std::size_t i) const { return angles_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  double total_weight() const;
  Point2 direction(std::size_t i) const { return unit_vector(angles_[i]); }

  std::size_t sector_of(double angle) const;
  std::size_t sector_of(const Point2& p) const { return sector_of(p.angle()); }

  bool operator==(const SphereGrid& other) const;

 private:
  std::vector<double> angles_;
  std::vector<double> weights_;
  std::vector<double> upper_;  // upper arc boundary of each sector
  int dim_;
};

// theta_i = 2*pi*i/n, w_i = 2*pi/n. Throws InvalidArgument for n < 3.
SphereGrid make_uniform_grid(int n);

enum class BodyKind {
  PiecewiseConstant,  // radial function constant on each sector
  HullPolytope,       // conv{u_i / t_i}
};

// A star body described by its gauge t_i = ||u_i||_K at the grid directions.
class StarBody {
 public:
  StarBody(SphereGrid grid, std::vector<double> t,
           BodyKind kind = BodyKind::PiecewiseConstant);

  const SphereGrid& grid() const { return grid_; }
  std::span<const double> t() const { return t_; }
  double t(std::size_t i) const { return t_[i]; }
  BodyKind kind() const { return kind_; }
  std::size_t size() const { return t_.size(); }

  std::vector<double> radial() const;
  // The dilate c*K, whose gauge is t / c.
  StarBody scaled(double c) const;

 private:
  SphereGrid grid_;
  std::vector<double> t_;
  BodyKind kind_;
};

// (1/d) sum_i w_i t_i^{-d}
double volume_pc(const StarBody& body);
// sum_i (1/2) sin(theta_{i+1} - theta_i) / (t_i t_{i+1}), cyclic.
double volume_polytope(const StarBody& body);
double volume(const StarBody& body);

double gauge_pc(const StarBody& body, const Point2& point);
// Gauge of the polygon through the points u_i / t_i. Equals the gauge of the
// convex hull whenever every vertex is extremal.
double gauge_polytope(const StarBody& body, const Point2& point);
double gauge(const StarBody& body, const Point2& point);

// max_i t_i. An under-approximation of the continuum constant for spiky bodies.
double lipschitz_pc(const StarBody& body);
// Exact max of the polygon gauge over the unit circle (attained on an edge
// normal or at a vertex).
double lipschitz_polytope(const StarBody& body);
double lipschitz(const StarBody& body);

// (1/d) sum_j w_j rho_K(j)^i rho_L(j)^{d-i}
double dual_mixed_volume(const StarBody& k, const StarBody& l, double order);

struct MixedVolumeReport {
  double lhs = 0.0;    // V_{-1}(K, L)^d
  double rhs = 0.0;    // vol(K)^{-1} vol(L)^{d+1}
  double slack = 0.0;  // lhs - rhs
};

MixedVolumeReport lutwak_report(const StarBody& k, const StarBody& l);

// M_{d+1}(S) = (1/d) sum_j w_j rho_S(j)^{d+1}
double moment_norm(const StarBody& s);

// Elementwise (d rho_P^{d+1} + eps rho_S^{d+1})^{1/(d+1)}.
std::vector<double> harmonic_radial_combination(std::span<const double> rho_p,
                                                std::span<const double> rho_s,
                                                double eps, int dim);

double sup_norm_diff(std::span<const double> a, std::span<const double> b);

}  // namespace starreg
