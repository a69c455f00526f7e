#pragma once

// Data distributions and the per-sector summaries every solver consumes.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "starreg/geometry.hpp"

namespace starreg {

struct Atom {
  Point2 point;
  double mass = 0.0;
};

// Finitely supported probability measure. Masses are positive and sum to one.
class AtomicDistribution {
 public:
  explicit AtomicDistribution(std::vector<Atom> atoms);

  // Rescales the masses to sum to one before validating.
  static AtomicDistribution normalized(std::vector<Atom> atoms);
  // Atoms at angle[i] with the given radius and mass.
  static AtomicDistribution on_circle(std::span<const double> angles, std::span<const double> masses,
                                      double radius = 1.0);

  std::size_t size() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }
  std::vector<Point2> points() const;
  Eigen::VectorXd masses() const;
  // E ||x||_2
  double mean_norm() const;

 private:
  std::vector<Atom> atoms_;
};

// Queryable density on R^2. Unnormalized densities are normalized by a
// quadrature estimate of their total mass before use.
class DensityOracle {
 public:
  using Fn = std::function<double(const Point2&)>;

  DensityOracle(Fn fn, bool normalized, std::optional<double> support_radius = std::nullopt,
                std::string name = "density");

  double operator()(const Point2& x) const { return fn_(x); }
  bool normalized() const { return normalized_; }
  // Radius beyond which the density vanishes, when known.
  std::optional<double> support_radius() const { return support_radius_; }
  const std::string& name() const { return name_; }

 private:
  Fn fn_;
  bool normalized_;
  std::optional<double> support_radius_;
  std::string name_;
};

// p(x) proportional to exp(-||x||_1 / scale).
DensityOracle laplace_l1_density(double scale = 1.0);
// Centered Gaussian with principal standard deviations (sx, sy) rotated by `rotation`.
DensityOracle gaussian_density(double sx = 1.0, double sy = 1.0, double rotation = 0.0);
DensityOracle uniform_disk_density(double radius = 1.0);

struct QuadratureParams {
  int angular_samples = 8;  // midpoint samples per sector
  int radial_panels = 32;
  int radial_nodes = 16;  // Gauss-Legendre nodes per panel
  double tail_tol = 1e-12;
  double max_radius = 1e6;
};

struct SectorSummary {
  SphereGrid grid;
  std::vector<double> alpha;
  double error = 0.0;  // quadrature error proxy; zero for exact summaries
};

struct SignedSummary {
  SphereGrid grid;
  std::vector<double> sigma;
};

// alpha_U = sum of mass * ||x|| over atoms in sector U.
SectorSummary sector_summary_atomic(const AtomicDistribution& dist, const SphereGrid& grid);
// alpha_U = int_U int_0^inf r^d p(r v) dr dv by Gauss-Legendre in r and
// midpoint sampling in angle. Returns the finer of two resolutions and their
// difference as the error proxy.
SectorSummary sector_summary_density(const DensityOracle& oracle, const SphereGrid& grid,
                                     const QuadratureParams& quad = {});
// int_0^inf r^d p(r u) dr along each direction u(angle), on the finer of the
// two radial resolutions used by sector_summary_density.
std::vector<double> density_radial_moments(const DensityOracle& oracle, std::span<const double> angles,
                                           const QuadratureParams& quad = {});

// Data spread uniformly over the circle of the given radius.
SectorSummary sector_summary_uniform_circle(double radius, const SphereGrid& grid);

SignedSummary signed_summary(const SectorSummary& p, const SectorSummary& q);

enum class CostKind {
  Arc,       // geodesic angle between directions
  Euclid,    // ||x - y||_2
  SqEuclid,  // squared geodesic angle
};

const char* to_string(CostKind kind);
CostKind parse_cost_kind(const std::string& name);

struct CostMatrix {
  Eigen::MatrixXd entries;
  CostKind kind = CostKind::Euclid;
  std::vector<std::string> warnings;

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
  double operator()(std::size_t i, std::size_t j) const { return entries(i, j); }
};

CostMatrix cost_matrix(std::span<const Point2> points, CostKind kind);

double expected_gauge(const AtomicDistribution& dist, const StarBody& body);

// Optimal transport cost between mass vectors on a common support indexed by C.
double w1_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q, const CostMatrix& cost);
// Same, on the union of both supports.
double w1_distance(const AtomicDistribution& p, const AtomicDistribution& q, CostKind kind);

}  // namespace starreg
