#include "starreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "starreg/error.hpp"

namespace starreg {

namespace {

constexpr double kPartitionTol = 1e-9;

void require_two_dim(const SphereGrid& grid, const char* what) {
  if (grid.dim() != 2) {
    throw InvalidArgument(std::string(what) + " needs a 2-D grid");
  }
}

void require_same_grid(const StarBody& a, const StarBody& b) {
  if (!(a.grid() == b.grid())) {
    throw InvalidArgument("bodies live on different grids");
  }
}

// Angle of edge i of the polygon, i.e. theta_{i+1} - theta_i with wraparound.
double edge_gap(const SphereGrid& grid, std::size_t i) {
  const std::size_t n = grid.size();
  const double next = (i + 1 == n) ? grid.angle(0) + kTwoPi : grid.angle(i + 1);
  return next - grid.angle(i);
}

void require_polygon_gaps(const SphereGrid& grid) {
  require_two_dim(grid, "hull polytope");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (edge_gap(grid, i) >= std::numbers::pi) {
      throw InvalidArgument("degenerate sector: gap between directions " + std::to_string(i) +
                            " and " + std::to_string((i + 1) % grid.size()) + " is >= pi");
    }
  }
}

}  // namespace

double Point2::norm() const { return std::hypot(x, y); }

double Point2::angle() const {
  double a = std::atan2(y, x);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

Point2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }

double geodesic_angle(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

SphereGrid::SphereGrid(std::vector<double> angles, std::vector<double> weights, int dim)
    : angles_(std::move(angles)), weights_(std::move(weights)), dim_(dim) {
  const std::size_t n = angles_.size();
  if (n < 3) throw InvalidArgument("invalid grid: need at least 3 sectors");
  if (weights_.size() != n) throw InvalidArgument("invalid grid: angles/weights size mismatch");
  if (dim_ < 2) throw InvalidArgument("invalid grid: dimension must be >= 2");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(angles_[i])) throw InvalidArgument("invalid grid: non-finite angle");
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
      throw InvalidArgument("invalid grid: weights must be positive and finite");
    }
  }
  if (dim_ != 2) return;

  for (std::size_t i = 0; i < n; ++i) {
    if (angles_[i] < 0.0 || angles_[i] >= kTwoPi) {
      throw InvalidArgument("invalid grid: angles must lie in [0, 2*pi)");
    }
    if (i > 0 && !(angles_[i] > angles_[i - 1])) {
      throw InvalidArgument("invalid grid: angles must be strictly increasing");
    }
  }
  if (std::abs(total_weight() - kTwoPi) > kPartitionTol) {
    throw InvalidArgument("invalid grid: weights must sum to 2*pi");
  }
  upper_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    upper_[i] = angles_[i] + 0.5 * weights_[i];
    const double next_lower = (i + 1 == n) ? angles_[0] + kTwoPi - 0.5 * weights_[0]
                                           : angles_[i + 1] - 0.5 * weights_[i + 1];
    if (std::abs(upper_[i] - next_lower) > kPartitionTol) {
      throw InvalidArgument("invalid grid: arcs of sectors " + std::to_string(i) + " and " +
                            std::to_string((i + 1) % n) + " do not meet");
    }
  }
}

double SphereGrid::total_weight() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

std::size_t SphereGrid::sector_of(double angle) const {
  if (upper_.empty()) throw InvalidArgument("sector lookup needs a 2-D grid");
  const double lower0 = upper_.back() - kTwoPi;
  double phi = std::fmod(angle, kTwoPi);
  if (phi < lower0) phi += kTwoPi;
  if (phi >= lower0 + kTwoPi) phi -= kTwoPi;
  auto it = std::lower_bound(upper_.begin(), upper_.end(), phi);
  if (it == upper_.end()) return 0;
  return static_cast<std::size_t>(it - upper_.begin());
}

bool SphereGrid::operator==(const SphereGrid& other) const {
  return dim_ == other.dim_ && angles_ == other.angles_ && weights_ == other.weights_;
}

SphereGrid make_uniform_grid(int n) {
  if (n < 3) throw InvalidArgument("invalid grid: need at least 3 sectors, got " + std::to_string(n));
  std::vector<double> angles(n), weights(n, kTwoPi / n);
  for (int i = 0; i < n; ++i) angles[i] = kTwoPi * i / n;
  return SphereGrid(std::move(angles), std::move(weights), 2);
}

StarBody::StarBody(SphereGrid grid, std::vector<double> t, BodyKind kind)
    : grid_(std::move(grid)), t_(std::move(t)), kind_(kind) {
  if (t_.size() != grid_.size()) throw InvalidArgument("invalid body: gauge vector length != grid size");
  for (double v : t_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("invalid body: gauge values must be positive and finite");
    }
  }
  if (kind_ == BodyKind::HullPolytope) require_polygon_gaps(grid_);
}

std::vector<double> StarBody::radial() const {
  std::vector<double> rho(t_.size());
  for (std::size_t i = 0; i < t_.size(); ++i) rho[i] = 1.0 / t_[i];
  return rho;
}

StarBody StarBody::scaled(double c) const {
  if (!(c > 0.0)) throw InvalidArgument("dilation factor must be positive");
  std::vector<double> t = t_;
  for (double& v : t) v /= c;
  return StarBody(grid_, std::move(t), kind_);
}

double volume_pc(const StarBody& body) {
  const auto& g = body.grid();
  const int d = g.dim();
  double s = 0.0;
  for (std::size_t i = 0; i < body.size(); ++i) s += g.weight(i) * std::pow(body.t(i), -d);
  return s / d;
}

double volume_polytope(const StarBody& body) {
  const auto& g = body.grid();
  require_polygon_gaps(g);
  const std::size_t n = body.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += 0.5 * std::sin(edge_gap(g, i)) / (body.t(i) * body.t((i + 1) % n));
  }
  return s;
}

double volume(const StarBody& body) {
  return body.kind() == BodyKind::HullPolytope ? volume_polytope(body) : volume_pc(body);
}

double gauge_pc(const StarBody& body, const Point2& point) {
  const double r = point.norm();
  if (r == 0.0) return 0.0;
  return r * body.t(body.grid().sector_of(point));
}

double gauge_polytope(const StarBody& body, const Point2& point) {
  const double r = point.norm();
  if (r == 0.0) return 0.0;
  const auto& g = body.grid();
  require_polygon_gaps(g);
  const std::size_t n = g.size();
  double phi = point.angle();
  if (phi < g.angle(0)) phi += kTwoPi;
  auto angles = g.angles();
  auto it = std::upper_bound(angles.begin(), angles.end(), phi);
  const std::size_t i = static_cast<std::size_t>(it - angles.begin()) - 1;
  const std::size_t j = (i + 1) % n;
  const double gap = edge_gap(g, i);
  const double off = phi - g.angle(i);
  return r * (body.t(i) * std::sin(gap - off) + body.t(j) * std::sin(off)) / std::sin(gap);
}

double gauge(const StarBody& body, const Point2& point) {
  return body.kind() == BodyKind::HullPolytope ? gauge_polytope(body, point) : gauge_pc(body, point);
}

double lipschitz_pc(const StarBody& body) {
  return *std::max_element(body.t().begin(), body.t().end());
}

double lipschitz_polytope(const StarBody& body) {
  const auto& g = body.grid();
  require_polygon_gaps(g);
  const std::size_t n = g.size();
  double best = lipschitz_pc(body);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const double a0 = g.angle(i);
    const double gap = edge_gap(g, i);
    const double a1 = a0 + gap;
    // On this edge's cone the gauge is <a, x> with <a, u_i> = t_i, <a, u_j> = t_j.
    const double det = std::sin(gap);
    const double ax = (body.t(i) * std::sin(a1) - body.t(j) * std::sin(a0)) / det;
    const double ay = (body.t(j) * std::cos(a0) - body.t(i) * std::cos(a1)) / det;
    const double norm_a = std::hypot(ax, ay);
    double dir = std::atan2(ay, ax);
    while (dir < a0) dir += kTwoPi;
    if (dir <= a1) best = std::max(best, norm_a);
  }
  return best;
}

double lipschitz(const StarBody& body) {
  return body.kind() == BodyKind::HullPolytope ? lipschitz_polytope(body) : lipschitz_pc(body);
}

double dual_mixed_volume(const StarBody& k, const StarBody& l, double order) {
  require_same_grid(k, l);
  const auto& g = k.grid();
  const int d = g.dim();
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    // rho = 1/t, so rho_K^i rho_L^{d-i} = t_K^{-i} t_L^{i-d}.
    s += g.weight(j) * std::pow(k.t(j), -order) * std::pow(l.t(j), order - d);
  }
  return s / d;
}

MixedVolumeReport lutwak_report(const StarBody& k, const StarBody& l) {
  const int d = k.grid().dim();
  MixedVolumeReport r;
  r.lhs = std::pow(dual_mixed_volume(k, l, -1.0), d);
  r.rhs = std::pow(volume_pc(l), d + 1) / volume_pc(k);
  r.slack = r.lhs - r.rhs;
  return r;
}

double moment_norm(const StarBody& s) {
  const auto& g = s.grid();
  const int d = g.dim();
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) acc += g.weight(j) * std::pow(s.t(j), -(d + 1));
  return acc / d;
}

std::vector<double> harmonic_radial_combination(std::span<const double> rho_p,
                                                std::span<const double> rho_s,
                                                double eps, int dim) {
  if (rho_p.size() != rho_s.size()) throw InvalidArgument("radial vectors differ in length");
  if (!(eps >= 0.0)) throw InvalidArgument("eps must be nonnegative");
  if (dim < 1) throw InvalidArgument("dimension must be positive");
  std::vector<double> out(rho_p.size());
  const double p = dim + 1.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(rho_p[i] > 0.0) || !(rho_s[i] > 0.0)) {
      throw InvalidArgument("radial values must be positive");
    }
    out[i] = std::pow(dim * std::pow(rho_p[i], p) + eps * std::pow(rho_s[i], p), 1.0 / p);
  }
  return out;
}

double sup_norm_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("vectors differ in length");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace starreg
