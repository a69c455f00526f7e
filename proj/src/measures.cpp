#include "starreg/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "quadrature.hpp"
#include "starreg/error.hpp"
#include "starreg/lp.hpp"

namespace starreg {

namespace {

constexpr double kOverflowGuard = 1e150;

struct DensityMoments {
  std::vector<double> alpha;  // int r^2 p
  double mass = 0.0;          // int r p
};

double checked_sample(const DensityOracle& oracle, const Point2& x) {
  const double v = oracle(x);
  if (v < 0.0) throw InvalidArgument(oracle.name() + ": negative density sample");
  if (!std::isfinite(v)) throw InvalidArgument(oracle.name() + ": non-finite density sample");
  return v;
}

DensityMoments integrate_sectors(const DensityOracle& oracle, const SphereGrid& grid, int m,
                                 const detail::RadialRule& rule) {
  DensityMoments out;
  out.alpha.assign(grid.size(), 0.0);
  for (std::size_t u = 0; u < grid.size(); ++u) {
    const double w = grid.weight(u);
    const double start = grid.angle(u) - 0.5 * w;
    double a = 0.0, mass = 0.0;
    for (int k = 0; k < m; ++k) {
      const Point2 v = unit_vector(start + (k + 0.5) * w / m);
      double ia = 0.0, im = 0.0;
      for (std::size_t q = 0; q < rule.r.size(); ++q) {
        const double r = rule.r[q];
        const double f = checked_sample(oracle, v * r) * rule.w[q];
        ia += r * r * f;
        im += r * f;
      }
      a += ia;
      mass += im;
    }
    out.alpha[u] = a * w / m;
    out.mass += mass * w / m;
  }
  return out;
}

// Total radial moment along a fixed fan of directions, used to pick the
// truncation radius independently of the sector grid.
double probe_moment(const DensityOracle& oracle, double r_max, const QuadratureParams& quad,
                    const detail::GaussRule& base) {
  const detail::RadialRule rule = detail::composite_radial_rule(r_max, quad.radial_panels, base);
  constexpr int kDirections = 64;
  double total = 0.0;
  for (int k = 0; k < kDirections; ++k) {
    const Point2 v = unit_vector(kTwoPi * (k + 0.5) / kDirections);
    for (std::size_t q = 0; q < rule.r.size(); ++q) {
      total += rule.r[q] * rule.r[q] * checked_sample(oracle, v * rule.r[q]) * rule.w[q];
    }
  }
  return total;
}

double truncation_radius(const DensityOracle& oracle, const QuadratureParams& quad,
                         const detail::GaussRule& base) {
  if (auto r = oracle.support_radius()) return *r;
  double r_max = 1.0;
  double prev = probe_moment(oracle, r_max, quad, base);
  while (r_max < quad.max_radius) {
    const double next = probe_moment(oracle, 2.0 * r_max, quad, base);
    r_max *= 2.0;
    if (!std::isfinite(next) || next > kOverflowGuard) {
      throw InvalidArgument(oracle.name() + ": radial moment integral is not finite");
    }
    if (std::abs(next - prev) <= quad.tail_tol * std::abs(next)) return r_max;
    prev = next;
  }
  throw InvalidArgument(oracle.name() + ": radial moment does not converge; tail too heavy");
}

}  // namespace

AtomicDistribution::AtomicDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw InvalidArgument("distribution has no atoms");
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (!std::isfinite(a.point.x) || !std::isfinite(a.point.y)) {
      throw InvalidArgument("atom with non-finite coordinates");
    }
    if (a.point.norm() == 0.0) throw InvalidArgument("atom at the origin");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass)) throw InvalidArgument("atom masses must be positive");
    total += a.mass;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("atom masses must sum to 1");
}

AtomicDistribution AtomicDistribution::normalized(std::vector<Atom> atoms) {
  double total = 0.0;
  for (const Atom& a : atoms) total += a.mass;
  if (!(total > 0.0)) throw InvalidArgument("atom masses must be positive");
  for (Atom& a : atoms) a.mass /= total;
  return AtomicDistribution(std::move(atoms));
}

AtomicDistribution AtomicDistribution::on_circle(std::span<const double> angles,
                                                 std::span<const double> masses, double radius) {
  if (angles.size() != masses.size()) throw InvalidArgument("angles/masses size mismatch");
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < angles.size(); ++i) atoms.push_back({unit_vector(angles[i]) * radius, masses[i]});
  return AtomicDistribution(std::move(atoms));
}

std::vector<Point2> AtomicDistribution::points() const {
  std::vector<Point2> pts;
  pts.reserve(atoms_.size());
  for (const Atom& a : atoms_) pts.push_back(a.point);
  return pts;
}

Eigen::VectorXd AtomicDistribution::masses() const {
  Eigen::VectorXd m(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i) m[i] = atoms_[i].mass;
  return m;
}

double AtomicDistribution::mean_norm() const {
  double s = 0.0;
  for (const Atom& a : atoms_) s += a.mass * a.point.norm();
  return s;
}

DensityOracle::DensityOracle(Fn fn, bool normalized, std::optional<double> support_radius,
                             std::string name)
    : fn_(std::move(fn)), normalized_(normalized), support_radius_(support_radius), name_(std::move(name)) {
  if (!fn_) throw InvalidArgument("density oracle without a function");
  if (support_radius_ && !(*support_radius_ > 0.0)) throw InvalidArgument("support radius must be positive");
}

DensityOracle laplace_l1_density(double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("laplace-l1: scale must be positive");
  const double c = 1.0 / (4.0 * scale * scale);
  return DensityOracle(
      [scale, c](const Point2& x) { return c * std::exp(-(std::abs(x.x) + std::abs(x.y)) / scale); }, true,
      std::nullopt, "laplace-l1");
}

DensityOracle gaussian_density(double sx, double sy, double rotation) {
  if (!(sx > 0.0) || !(sy > 0.0)) throw InvalidArgument("gaussian: standard deviations must be positive");
  const double c = 1.0 / (kTwoPi * sx * sy);
  const double cr = std::cos(rotation), sr = std::sin(rotation);
  return DensityOracle(
      [=](const Point2& x) {
        const double u = (cr * x.x + sr * x.y) / sx;
        const double v = (-sr * x.x + cr * x.y) / sy;
        return c * std::exp(-0.5 * (u * u + v * v));
      },
      true, std::nullopt, "gaussian");
}

DensityOracle uniform_disk_density(double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("uniform-disk: radius must be positive");
  const double c = 1.0 / (std::numbers::pi * radius * radius);
  return DensityOracle([radius, c](const Point2& x) { return x.norm() <= radius ? c : 0.0; }, true, radius,
                       "uniform-disk");
}

SectorSummary sector_summary_atomic(const AtomicDistribution& dist, const SphereGrid& grid) {
  SectorSummary s{grid, std::vector<double>(grid.size(), 0.0), 0.0};
  for (const Atom& a : dist.atoms()) s.alpha[grid.sector_of(a.point)] += a.mass * a.point.norm();
  return s;
}

SectorSummary sector_summary_density(const DensityOracle& oracle, const SphereGrid& grid,
                                     const QuadratureParams& quad) {
  if (grid.dim() != 2) throw InvalidArgument("density summaries need a 2-D grid");
  if (quad.angular_samples < 1 || quad.radial_panels < 1 || quad.radial_nodes < 1) {
    throw InvalidArgument("quadrature parameters must be positive");
  }
  const detail::GaussRule base = detail::gauss_legendre(quad.radial_nodes);
  const double r_max = truncation_radius(oracle, quad, base);

  auto evaluate = [&](int m, int panels) {
    DensityMoments mom =
        integrate_sectors(oracle, grid, m, detail::composite_radial_rule(r_max, panels, base));
    if (!(mom.mass > 0.0)) throw InvalidArgument(oracle.name() + ": density has zero mass");
    const double z = oracle.normalized() ? 1.0 : mom.mass;
    for (double& a : mom.alpha) {
      a /= z;
      if (!std::isfinite(a) || a > kOverflowGuard) {
        throw InvalidArgument(oracle.name() + ": radial moment integral is not finite");
      }
    }
    return mom.alpha;
  };

  const std::vector<double> coarse = evaluate(quad.angular_samples, quad.radial_panels);
  std::vector<double> fine = evaluate(2 * quad.angular_samples, 2 * quad.radial_panels);
  const double error = sup_norm_diff(fine, coarse);
  return SectorSummary{grid, std::move(fine), error};
}

std::vector<double> density_radial_moments(const DensityOracle& oracle, std::span<const double> angles,
                                           const QuadratureParams& quad) {
  const detail::GaussRule base = detail::gauss_legendre(quad.radial_nodes);
  const double r_max = truncation_radius(oracle, quad, base);
  const detail::RadialRule rule = detail::composite_radial_rule(r_max, 2 * quad.radial_panels, base);
  double z = 1.0;
  if (!oracle.normalized()) {
    constexpr int kFan = 1024;
    z = 0.0;
    for (int k = 0; k < kFan; ++k) {
      const Point2 v = unit_vector(kTwoPi * (k + 0.5) / kFan);
      for (std::size_t q = 0; q < rule.r.size(); ++q) z += rule.r[q] * checked_sample(oracle, v * rule.r[q]) * rule.w[q];
    }
    z *= kTwoPi / kFan;
    if (!(z > 0.0)) throw InvalidArgument(oracle.name() + ": density has zero mass");
  }
  std::vector<double> out(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const Point2 v = unit_vector(angles[i]);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.r.size(); ++q) {
      acc += rule.r[q] * rule.r[q] * checked_sample(oracle, v * rule.r[q]) * rule.w[q];
    }
    out[i] = acc / z;
  }
  return out;
}

SectorSummary sector_summary_uniform_circle(double radius, const SphereGrid& grid) {
  if (!(radius > 0.0)) throw InvalidArgument("uniform-circle: radius must be positive");
  SectorSummary s{grid, std::vector<double>(grid.size()), 0.0};
  const double total = grid.total_weight();
  for (std::size_t u = 0; u < grid.size(); ++u) s.alpha[u] = radius * grid.weight(u) / total;
  return s;
}

SignedSummary signed_summary(const SectorSummary& p, const SectorSummary& q) {
  if (!(p.grid == q.grid)) throw InvalidArgument("summaries live on different grids");
  SignedSummary s{p.grid, std::vector<double>(p.alpha.size())};
  for (std::size_t u = 0; u < s.sigma.size(); ++u) s.sigma[u] = p.alpha[u] - q.alpha[u];
  return s;
}

const char* to_string(CostKind kind) {
  switch (kind) {
    case CostKind::Arc: return "arc";
    case CostKind::Euclid: return "euclid";
    case CostKind::SqEuclid: return "sqeuclid";
  }
  return "unknown";
}

CostKind parse_cost_kind(const std::string& name) {
  if (name == "arc") return CostKind::Arc;
  if (name == "euclid") return CostKind::Euclid;
  if (name == "sqeuclid") return CostKind::SqEuclid;
  throw InvalidArgument("unknown cost kind '" + name + "'");
}

CostMatrix cost_matrix(std::span<const Point2> points, CostKind kind) {
  const std::size_t n = points.size();
  if (n == 0) throw InvalidArgument("cost matrix needs at least one point");
  CostMatrix cm;
  cm.kind = kind;
  cm.entries = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> angles(n);
  for (std::size_t i = 0; i < n; ++i) angles[i] = points[i].angle();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double c = 0.0;
      switch (kind) {
        case CostKind::Arc: c = geodesic_angle(angles[i], angles[j]); break;
        case CostKind::Euclid: c = distance(points[i], points[j]); break;
        case CostKind::SqEuclid: {
          const double g = geodesic_angle(angles[i], angles[j]);
          c = g * g;
          break;
        }
      }
      cm.entries(i, j) = c;
      cm.entries(j, i) = c;
      if (c == 0.0) {
        cm.warnings.push_back("points " + std::to_string(i) + " and " + std::to_string(j) +
                              " are at zero cost");
      }
    }
  }
  return cm;
}

double expected_gauge(const AtomicDistribution& dist, const StarBody& body) {
  double s = 0.0;
  for (const Atom& a : dist.atoms()) s += a.mass * gauge(body, a.point);
  return s;
}

double w1_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q, const CostMatrix& cost) {
  const int n = static_cast<int>(cost.size());
  if (p.size() != n || q.size() != n) throw InvalidArgument("w1: mass vectors do not match the cost matrix");
  if ((p.array() < 0.0).any() || (q.array() < 0.0).any()) throw InvalidArgument("w1: negative mass");
  if (std::abs(p.sum() - q.sum()) > 1e-12 * std::max(1.0, p.sum())) {
    throw InvalidArgument("w1: total masses differ");
  }
  LinearProgram lp(n * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    lp.senses[i] = Sense::Equal;
    lp.b[i] = p[i];
    lp.senses[n + i] = Sense::Equal;
    lp.b[n + i] = q[i];
    for (int j = 0; j < n; ++j) {
      lp.c[i * n + j] = cost.entries(i, j);
      lp.a(i, i * n + j) = 1.0;
      lp.a(n + j, i * n + j) = 1.0;
    }
  }
  const LpSolution sol = solve_lp(lp);
  if (!sol.optimal()) throw SolverFailure(std::string("w1: transport LP is ") + to_string(sol.status));
  return std::max(0.0, sol.objective);
}

double w1_distance(const AtomicDistribution& p, const AtomicDistribution& q, CostKind kind) {
  std::vector<Point2> support = p.points();
  const std::vector<Point2> qp = q.points();
  support.insert(support.end(), qp.begin(), qp.end());
  const std::size_t np = p.size();
  Eigen::VectorXd pm = Eigen::VectorXd::Zero(support.size());
  Eigen::VectorXd qm = Eigen::VectorXd::Zero(support.size());
  pm.head(np) = p.masses();
  qm.tail(q.size()) = q.masses();
  return w1_distance(pm, qm, cost_matrix(support, kind));
}

}  // namespace starreg
