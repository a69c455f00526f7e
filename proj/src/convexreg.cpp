#include "starreg/convexreg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "barrier.hpp"
#include "starreg/error.hpp"

namespace starreg {

namespace {

double d_coeff(double ta, double tb) {
  const double v = std::cos(ta) * std::sin(tb) - std::cos(tb) * std::sin(ta);
  return std::abs(v) < 1e-12 ? 0.0 : v;
}

double forward_gap(double from, double to) {
  double g = std::fmod(to - from, kTwoPi);
  if (g <= 0.0) g += kTwoPi;
  return g;
}

// Polygon area sum (1/2) sin(theta_{i+1} - theta_i) / (t_i t_{i+1}) with its
// derivatives.
struct HullVolume {
  std::vector<double> c;

  explicit HullVolume(const SphereGrid& grid) : c(grid.size()) {
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i) c[i] = 0.5 * std::sin(forward_gap(grid.angle(i), grid.angle((i + 1) % n)));
  }

  double value(const Eigen::VectorXd& t) const {
    const int n = static_cast<int>(c.size());
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += c[i] / (t[i] * t[(i + 1) % n]);
    return v;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& t) const {
    const int n = static_cast<int>(c.size());
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      g[i] -= c[i] / (t[i] * t[i] * t[j]);
      g[j] -= c[i] / (t[i] * t[j] * t[j]);
    }
    return g;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& t) const {
    const int n = static_cast<int>(c.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      h(i, i) += 2.0 * c[i] / (t[i] * t[i] * t[i] * t[j]);
      h(j, j) += 2.0 * c[i] / (t[i] * t[j] * t[j] * t[j]);
      const double off = c[i] / (t[i] * t[i] * t[j] * t[j]);
      h(i, j) += off;
      h(j, i) += off;
    }
    return h;
  }
};

// Gradient of a row's slack with respect to t.
Eigen::VectorXd row_gradient(const ConvexityRow& r, int n) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  g[r.prev] += r.d_right;
  g[r.next] += r.d_left;
  g[r.center] -= r.d_outer;
  return g;
}

// Least-squares duals on the active rows: a - sum y_r grad g_r + nu grad V = 0.
void fit_duals(const ConvexityConstraintSet& set, const HullVolume& vol, std::span<const double> a,
               const Eigen::VectorXd& t, const std::vector<bool>& active, std::vector<double>& y, double& nu) {
  const int n = static_cast<int>(t.size());
  std::vector<int> idx;
  for (std::size_t r = 0; r < set.rows.size(); ++r) {
    if (active[r]) idx.push_back(static_cast<int>(r));
  }
  const int k = static_cast<int>(idx.size());
  Eigen::MatrixXd m(n, k + 1);
  for (int c = 0; c < k; ++c) m.col(c) = -row_gradient(set.rows[idx[c]], n);
  m.col(k) = vol.gradient(t);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = -a[i];
  const Eigen::VectorXd sol = m.completeOrthogonalDecomposition().solve(rhs);
  y.assign(set.rows.size(), 0.0);
  for (int c = 0; c < k; ++c) y[idx[c]] = sol[c];
  nu = sol[k];
}

double stationarity(const ConvexityConstraintSet& set, const HullVolume& vol, std::span<const double> a,
                    const Eigen::VectorXd& t, const std::vector<double>& y, double nu) {
  const int n = static_cast<int>(t.size());
  Eigen::VectorXd r = nu * vol.gradient(t);
  for (int i = 0; i < n; ++i) r[i] += a[i];
  for (std::size_t k = 0; k < set.rows.size(); ++k) {
    if (y[k] != 0.0) r -= y[k] * row_gradient(set.rows[k], n);
  }
  return r.cwiseAbs().maxCoeff();
}

// Newton on the KKT system with the active set fixed. Returns false when the
// system is singular or the result leaves the feasible set.
bool polish(const ConvexityConstraintSet& set, const HullVolume& vol, std::span<const double> a,
            const std::vector<bool>& active, Eigen::VectorXd& t) {
  const int n = static_cast<int>(t.size());
  std::vector<int> idx;
  for (std::size_t r = 0; r < set.rows.size(); ++r) {
    if (active[r]) idx.push_back(static_cast<int>(r));
  }
  const int k = static_cast<int>(idx.size());
  std::vector<double> y0;
  double nu = 0.0;
  fit_duals(set, vol, a, t, active, y0, nu);
  Eigen::VectorXd y(k);
  for (int c = 0; c < k; ++c) y[c] = y0[idx[c]];

  Eigen::VectorXd z = t;
  for (int it = 0; it < 30; ++it) {
    const Eigen::VectorXd gv = vol.gradient(z);
    Eigen::VectorXd f(n + k + 1);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n + k + 1, n + k + 1);
    f.head(n) = nu * gv;
    for (int i = 0; i < n; ++i) f[i] += a[i];
    jac.topLeftCorner(n, n) = nu * vol.hessian(z);
    for (int c = 0; c < k; ++c) {
      const Eigen::VectorXd gr = row_gradient(set.rows[idx[c]], n);
      f.head(n) -= y[c] * gr;
      jac.block(0, n + c, n, 1) = -gr;
      jac.block(n + c, 0, 1, n) = gr.transpose();
      f[n + c] = gr.dot(z);
    }
    jac.block(0, n + k, n, 1) = gv;
    jac.block(n + k, 0, 1, n) = gv.transpose();
    f[n + k] = vol.value(z) - 1.0;
    if (f.cwiseAbs().maxCoeff() < 1e-14) break;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) return false;
    const Eigen::VectorXd step = lu.solve(-f);
    z += step.head(n);
    y += step.segment(n, k);
    nu += step[n + k];
    if (!(z.minCoeff() > 0.0) || !z.allFinite()) return false;
  }
  if (k > 0 && y.minCoeff() < -1e-9) return false;
  if (nu < 0.0) return false;
  for (std::size_t r = 0; r < set.rows.size(); ++r) {
    const std::span<const double> zs(z.data(), static_cast<std::size_t>(n));
    if (set.rows[r].slack(zs) < -1e-12 * z.cwiseAbs().maxCoeff()) return false;
  }
  t = z;
  return true;
}

}  // namespace

double ConvexityRow::slack(std::span<const double> t) const {
  return t[prev] * d_right + t[next] * d_left - t[center] * d_outer;
}

ConvexityConstraintSet build_convexity_constraints(const SphereGrid& grid) {
  if (grid.dim() != 2) throw InvalidArgument("convexity rows are defined on planar grids only");
  const std::size_t n = grid.size();
  ConvexityConstraintSet set;
  for (std::size_t i = 0; i < n; ++i) {
    ConvexityRow r;
    r.prev = (i + n - 1) % n;
    r.center = i;
    r.next = (i + 1) % n;
    const double gap = forward_gap(grid.angle(r.prev), grid.angle(r.next));
    if (gap > M_PI + 1e-12) {
      char msg[200];
      std::snprintf(msg, sizeof msg,
                    "angles (%zu, %zu, %zu) span %.6g >= pi; the hull points cannot be kept extremal",
                    r.prev, r.center, r.next, gap);
      throw InvalidArgument(msg);
    }
    r.d_outer = d_coeff(grid.angle(r.prev), grid.angle(r.next));
    r.d_right = d_coeff(grid.angle(r.center), grid.angle(r.next));
    r.d_left = d_coeff(grid.angle(r.prev), grid.angle(r.center));
    if (r.d_outer == 0.0) {
      set.warnings.push_back("row " + std::to_string(i) +
                             " is degenerate (neighbors are antipodal); use at least 5 directions");
    }
    set.rows.push_back(r);
  }
  return set;
}

std::vector<double> convex_weights(const AtomicDistribution& dist, const SphereGrid& grid) {
  const std::size_t n = grid.size();
  const auto angles = grid.angles();
  std::vector<double> a(n, 0.0);
  for (const Atom& atom : dist.atoms()) {
    const double phi = atom.point.angle();
    auto it = std::upper_bound(angles.begin(), angles.end(), phi);
    const std::size_t hi = it == angles.end() ? 0 : static_cast<std::size_t>(it - angles.begin());
    const std::size_t lo = (hi + n - 1) % n;
    const double span = forward_gap(angles[lo], angles[hi]);
    double off = std::fmod(phi - angles[lo] + kTwoPi, kTwoPi);
    if (off >= span) off = 0.0;
    const double scale = atom.mass * atom.point.norm() / std::sin(span);
    a[lo] += scale * std::sin(span - off);
    a[hi] += scale * std::sin(off);
  }
  return a;
}

ConvexSolution solve_convex_regularizer(std::span<const double> a, const SphereGrid& grid, const ConvexOptions& opts) {
  const int n = static_cast<int>(grid.size());
  if (a.size() != grid.size()) throw InvalidArgument("weight vector length does not match the grid");
  double total = 0.0;
  for (double v : a) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("weights must be finite and nonnegative");
    total += v;
  }
  if (!(total > 0.0)) throw InvalidArgument("weights must not all vanish");

  const ConvexityConstraintSet set = build_convexity_constraints(grid);
  const HullVolume vol(grid);

  std::vector<detail::LinearRow> rows;
  for (const ConvexityRow& r : set.rows) {
    detail::LinearRow lr;
    if (r.d_right != 0.0) lr.terms.push_back({static_cast<int>(r.prev), r.d_right});
    if (r.d_left != 0.0) lr.terms.push_back({static_cast<int>(r.next), r.d_left});
    if (r.d_outer != 0.0) lr.terms.push_back({static_cast<int>(r.center), -r.d_outer});
    rows.push_back(std::move(lr));
  }
  detail::SmoothConstraint h;
  h.value = [&vol](const Eigen::VectorXd& t) {
    if (!(t.minCoeff() > 0.0)) return std::numeric_limits<double>::infinity();
    return vol.value(t) - 1.0;
  };
  h.derivatives = [&vol](const Eigen::VectorXd& t, Eigen::VectorXd& g, Eigen::MatrixXd& hess) {
    g = vol.gradient(t);
    hess = vol.hessian(t);
  };

  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) c[i] = a[i];
  double area = 0.0;
  for (double ci : vol.c) area += ci;
  const Eigen::VectorXd t0 = Eigen::VectorXd::Constant(n, std::sqrt(2.0 * area));

  detail::BarrierOptions bo;
  bo.gap_tol = opts.tol;
  bo.max_iters = opts.max_iters;
  const detail::BarrierResult res = detail::BarrierSolver(c, rows, {h}).solve(t0, bo);

  Eigen::VectorXd t = res.z;
  std::vector<bool> active(set.rows.size());
  for (std::size_t r = 0; r < set.rows.size(); ++r) {
    const double s = set.rows[r].slack(std::span<const double>(t.data(), static_cast<std::size_t>(n)));
    active[r] = res.row_duals[static_cast<int>(r)] > s;
  }
  polish(set, vol, a, active, t);
  t *= std::sqrt(vol.value(t));
  for (std::size_t r = 0; r < set.rows.size(); ++r) {
    active[r] = active[r] ||
                set.rows[r].slack(std::span<const double>(t.data(), static_cast<std::size_t>(n))) <= 1e-12 * t.maxCoeff();
  }

  ConvexSolution sol{StarBody(grid, std::vector<double>(t.data(), t.data() + n), BodyKind::HullPolytope), {}, 0.0, {}};
  sol.active = active;
  fit_duals(set, vol, a, t, active, sol.row_duals, sol.volume_dual);
  // Rows whose fitted dual is negative are not binding; refit without them.
  bool refit = false;
  for (std::size_t r = 0; r < set.rows.size(); ++r) {
    if (sol.active[r] && sol.row_duals[r] < 0.0) {
      sol.active[r] = false;
      refit = true;
    }
  }
  if (refit) fit_duals(set, vol, a, t, sol.active, sol.row_duals, sol.volume_dual);
  sol.objective = c.dot(t);
  sol.kkt_residual = stationarity(set, vol, a, t, sol.row_duals, sol.volume_dual);
  sol.iterations = res.iterations;
  if (sol.kkt_residual > 1e-6 * std::max(1.0, c.cwiseAbs().maxCoeff())) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "convex regularizer: KKT residual %.3e after polishing", sol.kkt_residual);
    throw SolverFailure(msg, res.log, std::vector<double>(t.data(), t.data() + n), sol.kkt_residual);
  }
  return sol;
}

KktReport verify_kkt(const ConvexSolution& sol, std::span<const double> a, const SphereGrid& grid) {
  const ConvexityConstraintSet set = build_convexity_constraints(grid);
  const HullVolume vol(grid);
  const int n = static_cast<int>(grid.size());
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i) t[i] = sol.body.t(i);
  const std::span<const double> ts = sol.body.t();

  KktReport rep;
  rep.stationarity = stationarity(set, vol, a, t, sol.row_duals, sol.volume_dual);
  rep.min_dual = sol.volume_dual;
  for (std::size_t r = 0; r < set.rows.size(); ++r) {
    const double s = set.rows[r].slack(ts);
    rep.min_dual = std::min(rep.min_dual, sol.row_duals[r]);
    rep.complementarity = std::max(rep.complementarity, std::abs(sol.row_duals[r] * s));
    rep.primal_violation = std::max(rep.primal_violation, -s);
  }
  rep.volume_residual = vol.value(t) - 1.0;
  rep.complementarity = std::max(rep.complementarity, std::abs(sol.volume_dual * rep.volume_residual));
  rep.pass = rep.stationarity <= 1e-7 && rep.min_dual >= -1e-12 && rep.complementarity <= 1e-8 &&
             rep.primal_violation <= 1e-9 && std::abs(rep.volume_residual) <= 1e-8;
  return rep;
}

RobustnessReport robustness_bound_check(const AtomicDistribution& p, const AtomicDistribution& q,
                                        const SphereGrid& grid, const ConvexOptions& opts) {
  const ConvexSolution kp = solve_convex_regularizer(convex_weights(p, grid), grid, opts);
  const ConvexSolution kq = solve_convex_regularizer(convex_weights(q, grid), grid, opts);
  RobustnessReport rep;
  rep.lhs = expected_gauge(q, kp.body);
  rep.lip_p = lipschitz(kp.body);
  rep.lip_q = lipschitz(kq.body);
  rep.w1 = w1_distance(p, q, CostKind::Euclid);
  rep.rhs = expected_gauge(q, kq.body) + (rep.lip_p + rep.lip_q) * rep.w1;
  rep.gauge_diff = sup_norm_diff(kp.body.t(), kq.body.t());
  rep.holds = rep.lhs <= rep.rhs + 1e-8;
  return rep;
}

}  // namespace starreg
