#include "starreg/dro.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "barrier.hpp"
#include "starreg/closedform.hpp"
#include "starreg/error.hpp"
#include "starreg/lp.hpp"

namespace starreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using detail::BarrierOptions;
using detail::BarrierSolver;
using detail::LinearRow;
using detail::SmoothConstraint;

struct BlockDuals {
  double s = 0.0;
  Eigen::VectorXd lambda;
};

void require_eps(double eps, const char* name) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw InvalidArgument(std::string(name) + " must be finite and nonnegative");
  }
}

double volume_of(const SphereGrid& grid, const Eigen::VectorXd& t) {
  const int d = grid.dim();
  double v = 0.0;
  for (int i = 0; i < t.size(); ++i) v += grid.weight(i) * std::pow(t[i], -d);
  return v / d;
}

// (1/d) sum w t^{-d} - 1 <= 0 on the first n coordinates.
SmoothConstraint volume_constraint(const SphereGrid& grid) {
  const int n = static_cast<int>(grid.size());
  const int d = grid.dim();
  SmoothConstraint h;
  h.value = [&grid, n](const Eigen::VectorXd& z) {
    for (int i = 0; i < n; ++i) {
      if (!(z[i] > 0.0)) return kInf;
    }
    return volume_of(grid, z.head(n)) - 1.0;
  };
  h.derivatives = [&grid, n, d](const Eigen::VectorXd& z, Eigen::VectorXd& g, Eigen::MatrixXd& hess) {
    for (int i = 0; i < n; ++i) {
      const double w = grid.weight(i);
      g[i] = -w * std::pow(z[i], -d - 1);
      hess(i, i) = (d + 1) * w * std::pow(z[i], -d - 2);
    }
  };
  return h;
}

// lambda_i = max_j (g_j - s C_ij); with s = inf only zero-cost targets count.
Eigen::VectorXd tight_lambda(const Eigen::VectorXd& g, const Eigen::MatrixXd& cost, double s) {
  Eigen::VectorXd lambda(cost.rows());
  for (int i = 0; i < cost.rows(); ++i) {
    double best = -kInf;
    for (int j = 0; j < cost.cols(); ++j) {
      if (std::isinf(s)) {
        if (cost(i, j) == 0.0) best = std::max(best, g[j]);
      } else {
        best = std::max(best, g[j] - s * cost(i, j));
      }
    }
    lambda[i] = best;
  }
  return lambda;
}

// Smallest s for which lambda_i + s C_ij >= g_j holds on every row.
double minimal_scale(const Eigen::VectorXd& g, const Eigen::MatrixXd& cost, const Eigen::VectorXd& lambda) {
  double s = 0.0;
  for (int i = 0; i < cost.rows(); ++i) {
    for (int j = 0; j < cost.cols(); ++j) {
      if (cost(i, j) > 0.0) s = std::max(s, (g[j] - lambda[i]) / cost(i, j));
    }
  }
  return s;
}

// Recovers certified (s, lambda) for one transport block at fixed gauges.
BlockDuals polish_block(const Eigen::VectorXd& g, const Eigen::VectorXd& p, const Eigen::MatrixXd& cost,
                        double eps, const DroOptions& opts) {
  BlockDuals out;
  if (eps == 0.0) {
    out.lambda = tight_lambda(g, cost, kInf);
    out.s = minimal_scale(g, cost, out.lambda);
    return out;
  }
  const std::size_t rows = static_cast<std::size_t>(cost.rows() * cost.cols());
  double s = 0.0;
  if (rows <= opts.polish_row_limit) {
    const LpSolution sol = solve_lp(build_inner_dual(g, p, cost, eps));
    if (!sol.optimal()) throw SolverFailure(std::string("polish: inner dual LP is ") + to_string(sol.status));
    s = std::max(0.0, sol.x[0]);
  } else {
    const LpSolution sol = solve_lp(build_inner_primal(g, p, cost, eps));
    if (!sol.optimal()) throw SolverFailure(std::string("polish: inner primal LP is ") + to_string(sol.status));
    s = std::max(0.0, sol.y[0]);
  }
  out.s = s;
  out.lambda = tight_lambda(g, cost, s);
  return out;
}

double block_objective(const BlockDuals& b, const Eigen::VectorXd& p, double eps) {
  return (eps > 0.0 ? b.s * eps : 0.0) + p.dot(b.lambda);
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Eigen::VectorXd uniform_gauge(const SphereGrid& grid, double target_volume) {
  const int d = grid.dim();
  const double t = std::pow(grid.total_weight() / (d * target_volume), 1.0 / d);
  return Eigen::VectorXd::Constant(static_cast<int>(grid.size()), t);
}

Eigen::VectorXd gauges_from(const TransportSupport& sup, const Eigen::VectorXd& t) {
  Eigen::VectorXd g(sup.points.size());
  for (std::size_t j = 0; j < sup.points.size(); ++j) g[j] = sup.radius[j] * t[sup.sector[j]];
  return g;
}

struct OuterResult {
  Eigen::VectorXd t;
  long iterations = 0;
  double optimality_gap = 0.0;
};

OuterResult outer_barrier(const SphereGrid& grid, const TransportSupport& sup, const Eigen::MatrixXd& cost,
                          double eps, const DroOptions& opts) {
  const int n = static_cast<int>(grid.size());
  const int k = static_cast<int>(sup.num_atoms);
  const int m = static_cast<int>(sup.points.size());
  const int s_idx = n;
  const int nv = n + 1 + k;

  Eigen::VectorXd c = Eigen::VectorXd::Zero(nv);
  c[s_idx] = eps;
  for (int i = 0; i < k; ++i) c[n + 1 + i] = sup.mass[i];

  std::vector<LinearRow> rows;
  rows.reserve(static_cast<std::size_t>(k) * m + 1);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < m; ++j) {
      LinearRow r;
      r.terms.push_back({n + 1 + i, 1.0});
      if (cost(i, j) != 0.0) r.terms.push_back({s_idx, cost(i, j)});
      r.terms.push_back({static_cast<int>(sup.sector[j]), -sup.radius[j]});
      rows.push_back(std::move(r));
    }
  }
  rows.push_back(LinearRow{{{s_idx, 1.0}}, 0.0});

  Eigen::VectorXd z0(nv);
  z0.head(n) = uniform_gauge(grid, 0.5);
  z0[s_idx] = 1.0;
  const Eigen::VectorXd g0 = gauges_from(sup, z0.head(n));
  const Eigen::VectorXd l0 = tight_lambda(g0, cost.topRows(k), 1.0);
  for (int i = 0; i < k; ++i) z0[n + 1 + i] = l0[i] + 1.0;

  BarrierSolver solver(c, std::move(rows), {volume_constraint(grid)});
  BarrierOptions bo;
  bo.gap_tol = opts.barrier_tol;
  bo.max_iters = opts.max_iters;
  const detail::BarrierResult res = solver.solve(z0, bo);
  return {res.z.head(n), res.iterations, res.gap_bound};
}

OuterResult outer_subgradient(const SphereGrid& grid, const TransportSupport& sup, const Eigen::MatrixXd& cost,
                              double eps, const DroOptions& opts) {
  const int n = static_cast<int>(grid.size());
  const int k = static_cast<int>(sup.num_atoms);
  const int m = static_cast<int>(sup.points.size());
  const int d = grid.dim();

  auto objective = [&](const Eigen::VectorXd& t, double s) {
    const Eigen::VectorXd g = gauges_from(sup, t);
    double f = s * eps;
    for (int i = 0; i < k; ++i) {
      double best = -kInf;
      for (int j = 0; j < m; ++j) best = std::max(best, g[j] - s * cost(i, j));
      f += sup.mass[i] * best;
    }
    return f;
  };

  Eigen::VectorXd t = uniform_gauge(grid, 1.0);
  double s = t.maxCoeff();
  Eigen::VectorXd best_t = t;
  double best_f = objective(t, s);
  double step_scale = 0.0;
  Eigen::VectorXd gt(n);
  long it = 0;
  for (it = 1; it <= opts.max_iters; ++it) {
    const Eigen::VectorXd g = gauges_from(sup, t);
    gt.setZero();
    double gs = eps;
    for (int i = 0; i < k; ++i) {
      int arg = 0;
      double best = -kInf;
      for (int j = 0; j < m; ++j) {
        const double v = g[j] - s * cost(i, j);
        if (v > best) {
          best = v;
          arg = j;
        }
      }
      gt[sup.sector[arg]] += sup.mass[i] * sup.radius[arg];
      gs -= sup.mass[i] * cost(i, arg);
    }
    const double gnorm = std::max(gt.cwiseAbs().maxCoeff(), std::abs(gs));
    if (gnorm == 0.0) break;
    if (step_scale == 0.0) step_scale = 0.1 * t.maxCoeff() / gnorm;
    const double step = step_scale / std::sqrt(static_cast<double>(it));
    Eigen::VectorXd normal(n);
    for (int u = 0; u < n; ++u) normal[u] = grid.weight(u) * std::pow(t[u], -d - 1);
    gt -= (gt.dot(normal) / normal.squaredNorm()) * normal;
    t -= step * gt;
    s = std::max(0.0, s - step * gs);
    t = t.cwiseMax(opts.floor);
    t *= std::pow(volume_of(grid, t), 1.0 / d);
    const double f = objective(t, s);
    if (f < best_f) {
      best_f = f;
      best_t = t;
    }
  }
  return {best_t, std::min(it, opts.max_iters), 0.0};
}

}  // namespace

double DroSolution::anisotropy() const {
  const auto t = body.t();
  return *std::max_element(t.begin(), t.end()) / *std::min_element(t.begin(), t.end());
}

TransportSupport complete_support(const AtomicDistribution& dist, const SphereGrid& grid) {
  TransportSupport sup;
  const std::size_t n = grid.size();
  std::vector<bool> occupied(n, false);
  for (const Atom& a : dist.atoms()) {
    const std::size_t u = grid.sector_of(a.point);
    occupied[u] = true;
    sup.points.push_back(a.point);
    sup.sector.push_back(u);
  }
  sup.num_atoms = dist.size();
  const double r = dist.mean_norm();
  for (std::size_t u = 0; u < n; ++u) {
    if (occupied[u]) continue;
    sup.points.push_back(grid.direction(u) * r);
    sup.sector.push_back(u);
  }
  const int m = static_cast<int>(sup.points.size());
  sup.radius.resize(m);
  sup.mass = Eigen::VectorXd::Zero(m);
  for (int j = 0; j < m; ++j) sup.radius[j] = sup.points[j].norm();
  sup.mass.head(dist.size()) = dist.masses();
  return sup;
}

Eigen::VectorXd support_gauges(const TransportSupport& support, const StarBody& body) {
  Eigen::VectorXd t(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) t[i] = body.t(i);
  return gauges_from(support, t);
}

double inner_value(const Eigen::VectorXd& t, const Eigen::VectorXd& p, const Eigen::MatrixXd& cost, double eps) {
  const LpSolution sol = solve_lp(build_inner_primal(t, p, cost, eps));
  if (!sol.optimal()) throw SolverFailure(std::string("inner primal LP is ") + to_string(sol.status));
  return sol.objective;
}

DroSolution solve_dro(const DroProblem& problem, const DroOptions& opts) {
  require_eps(problem.eps, "eps");
  const SphereGrid& grid = problem.grid;
  const int n = static_cast<int>(grid.size());
  const TransportSupport sup = complete_support(problem.dist, grid);
  const Eigen::MatrixXd cost = cost_matrix(sup.points, problem.cost).entries;
  const int k = static_cast<int>(sup.num_atoms);
  const Eigen::VectorXd p = sup.mass.head(k);

  Eigen::VectorXd t(n);
  DroSolution sol{StarBody(grid, std::vector<double>(n, 1.0)), 0.0, {}, sup.points, sup.mass};
  if (problem.eps == 0.0) {
    const StarBody body = optimal_star_eps0(sector_summary_atomic(problem.dist, grid));
    for (int i = 0; i < n; ++i) t[i] = body.t(i);
  } else {
    const OuterResult r = problem.eps > 0.0 && opts.engine == DroEngine::Subgradient
                              ? outer_subgradient(grid, sup, cost, problem.eps, opts)
                              : outer_barrier(grid, sup, cost, problem.eps, opts);
    t = r.t;
    sol.iterations = r.iterations;
    sol.optimality_gap = r.optimality_gap;
    t *= std::pow(volume_of(grid, t), 1.0 / grid.dim());
  }
  sol.body = StarBody(grid, std::vector<double>(t.data(), t.data() + n));
  sol.volume = volume_pc(sol.body);
  sol.hit_floor = t.minCoeff() <= opts.floor;

  const Eigen::VectorXd g = gauges_from(sup, t);
  const BlockDuals duals = polish_block(g, p, cost.topRows(k), problem.eps, opts);
  sol.s = duals.s;
  sol.lambda = tight_lambda(g, cost, sol.s);
  sol.lambda.head(k) = duals.lambda;
  sol.objective = block_objective(duals, p, problem.eps);
  sol.inner_value = inner_value(g, p, cost.topRows(k), problem.eps);
  sol.certificate_gap = relative_gap(sol.objective, sol.inner_value);

  double res = 0.0;
  for (int i = 0; i < cost.rows(); ++i) {
    for (int j = 0; j < cost.cols(); ++j) {
      const double slack = g[j] - sol.s * cost(i, j) - sol.lambda[i];
      if (std::isfinite(slack)) res = std::max(res, slack);
    }
  }
  sol.constraint_residual = res;

  if (sol.certificate_gap > opts.gap_tol) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "dro: certificate gap %.3e exceeds tolerance %.3e", sol.certificate_gap,
                  opts.gap_tol);
    throw SolverFailure(msg, {}, std::vector<double>(t.data(), t.data() + n), sol.certificate_gap);
  }
  return sol;
}

CriticDroSolution solve_dro_critic(const CriticDroProblem& problem, const DroOptions& opts) {
  require_eps(problem.eps_p, "eps_p");
  require_eps(problem.eps_q, "eps_q");
  if (!(problem.eps_ball > 0.0) || !std::isfinite(problem.eps_ball)) {
    throw InvalidArgument("eps_ball must be positive");
  }
  const SphereGrid& grid = problem.grid;
  const int n = static_cast<int>(grid.size());
  const int d = grid.dim();
  const double cap = 1.0 / problem.eps_ball;
  const double ball_volume = grid.total_weight() * std::pow(problem.eps_ball, d) / d;
  if (ball_volume > 1.0 + 1e-12) {
    throw InfeasibleError("the ball of radius eps_ball has volume above 1; no unit-volume body contains it");
  }

  // Common support: P atoms, Q atoms, then one point per sector neither touches.
  std::vector<Atom> merged = problem.dist_p.atoms();
  merged.insert(merged.end(), problem.dist_q.atoms().begin(), problem.dist_q.atoms().end());
  for (Atom& a : merged) a.mass *= 0.5;
  const TransportSupport sup = complete_support(AtomicDistribution::normalized(merged), grid);
  const Eigen::MatrixXd cost = cost_matrix(sup.points, problem.cost).entries;
  const int kp = static_cast<int>(problem.dist_p.size());
  const int kq = static_cast<int>(problem.dist_q.size());
  const int m = static_cast<int>(sup.points.size());
  const Eigen::VectorXd pm = problem.dist_p.masses();
  const Eigen::VectorXd qm = problem.dist_q.masses();
  const Eigen::MatrixXd cost_p = cost.topRows(kp);
  const Eigen::MatrixXd cost_q = cost.middleRows(kp, kq);

  Eigen::VectorXd t(n);
  CriticDroSolution sol{StarBody(grid, std::vector<double>(n, 1.0)), 0.0, 0.0, {}, {}};
  if (problem.eps_p == 0.0 && problem.eps_q == 0.0) {
    const SignedSummary sigma =
        signed_summary(sector_summary_atomic(problem.dist_p, grid), sector_summary_atomic(problem.dist_q, grid));
    const CriticSolution cs = optimal_critic(sigma, problem.eps_ball);
    for (int i = 0; i < n; ++i) t[i] = cs.body.t(i);
  } else if (ball_volume >= 1.0) {
    t.setConstant(cap);
  } else {
    // Variable layout: t, then per block [s (if eps > 0), lambda].
    int next = n;
    const int sp = problem.eps_p > 0.0 ? next++ : -1;
    const int lp0 = next;
    next += kp;
    const int sq = problem.eps_q > 0.0 ? next++ : -1;
    const int lq0 = next;
    next += kq;
    const int nv = next;

    Eigen::VectorXd c = Eigen::VectorXd::Zero(nv);
    if (sp >= 0) c[sp] = problem.eps_p;
    if (sq >= 0) c[sq] = problem.eps_q;
    c.segment(lp0, kp) = pm;
    c.segment(lq0, kq) = qm;

    std::vector<LinearRow> rows;
    auto add_block = [&](const Eigen::MatrixXd& cb, int s_idx, int l0, double sign) {
      for (int i = 0; i < cb.rows(); ++i) {
        for (int j = 0; j < m; ++j) {
          if (s_idx < 0 && cb(i, j) != 0.0) continue;
          LinearRow r;
          r.terms.push_back({l0 + i, 1.0});
          if (s_idx >= 0 && cb(i, j) != 0.0) r.terms.push_back({s_idx, cb(i, j)});
          r.terms.push_back({static_cast<int>(sup.sector[j]), -sign * sup.radius[j]});
          rows.push_back(std::move(r));
        }
      }
      if (s_idx >= 0) rows.push_back(LinearRow{{{s_idx, 1.0}}, 0.0});
    };
    add_block(cost_p, sp, lp0, 1.0);
    add_block(cost_q, sq, lq0, -1.0);
    for (int u = 0; u < n; ++u) rows.push_back(LinearRow{{{u, -1.0}}, -cap});

    Eigen::VectorXd z0(nv);
    const double target = 0.5 * (1.0 + ball_volume);
    z0.head(n).setConstant(cap * std::pow(ball_volume / target, 1.0 / d));
    const Eigen::VectorXd g0 = gauges_from(sup, z0.head(n));
    const Eigen::VectorXd lp_start = tight_lambda(g0, cost_p, sp >= 0 ? 1.0 : kInf);
    const Eigen::VectorXd lq_start = tight_lambda(-g0, cost_q, sq >= 0 ? 1.0 : kInf);
    if (sp >= 0) z0[sp] = 1.0;
    if (sq >= 0) z0[sq] = 1.0;
    z0.segment(lp0, kp) = lp_start.array() + 1.0;
    z0.segment(lq0, kq) = lq_start.array() + 1.0;

    BarrierSolver solver(c, std::move(rows), {volume_constraint(grid)});
    BarrierOptions bo;
    bo.gap_tol = opts.barrier_tol;
    bo.max_iters = opts.max_iters;
    const detail::BarrierResult res = solver.solve(z0, bo);
    t = res.z.head(n);
    sol.iterations = res.iterations;
    sol.optimality_gap = res.gap_bound;
  }
  sol.body = StarBody(grid, std::vector<double>(t.data(), t.data() + n));
  sol.volume = volume_pc(sol.body);

  const Eigen::VectorXd g = gauges_from(sup, t);
  const BlockDuals bp = polish_block(g, pm, cost_p, problem.eps_p, opts);
  const BlockDuals bq = polish_block(-g, qm, cost_q, problem.eps_q, opts);
  sol.s_p = bp.s;
  sol.s_q = bq.s;
  sol.lambda_p = bp.lambda;
  sol.lambda_q = bq.lambda;
  sol.objective = block_objective(bp, pm, problem.eps_p) + block_objective(bq, qm, problem.eps_q);
  sol.inner_value = inner_value(g, pm, cost_p, problem.eps_p) + inner_value(-g, qm, cost_q, problem.eps_q);
  sol.certificate_gap = relative_gap(sol.objective, sol.inner_value);
  if (sol.certificate_gap > opts.gap_tol) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "dro-critic: certificate gap %.3e exceeds tolerance %.3e",
                  sol.certificate_gap, opts.gap_tol);
    throw SolverFailure(msg, {}, std::vector<double>(t.data(), t.data() + n), sol.certificate_gap);
  }
  return sol;
}

std::vector<DroSolution> epsilon_sweep(const DroProblem& problem, std::span<const double> eps_list,
                                       const DroOptions& opts) {
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] >= eps_list[i - 1])) throw InvalidArgument("eps list must be ascending");
  }
  std::vector<DroSolution> out;
  out.reserve(eps_list.size());
  for (double e : eps_list) {
    DroProblem p = problem;
    p.eps = e;
    out.push_back(solve_dro(p, opts));
  }
  return out;
}

namespace {

// sup_{r >= 0} g r - s ||x - r u|| for a unit direction u with gauge g <= s.
double ray_supremum(double g, double s, const Point2& x, const Point2& u) {
  const double a = x.x * u.x + x.y * u.y;
  const double h = std::abs(x.x * u.y - x.y * u.x);
  if (g >= s) return std::max(s * a, -s * x.norm());
  const double root = std::sqrt(s * s - g * g);
  const double r_star = a + h * g / root;
  return r_star >= 0.0 ? g * a - h * root : -s * x.norm();
}

}  // namespace

double critic_potential(const StarBody& body, double s, const Point2& x, const PotentialSamples& samples) {
  if (!(s > 0.0)) throw InvalidArgument("critic potential needs s > 0; for small s the supremum is +inf");
  if (samples.per_sector < 0) throw InvalidArgument("sample count must be nonnegative");
  if (lipschitz(body) > s) return kInf;
  const SphereGrid& grid = body.grid();
  const double phi = x.angle();
  double best = -s * x.norm();
  if (body.kind() == BodyKind::PiecewiseConstant) {
    // The gauge is constant on each arc, so the nearest point of the arc wins.
    for (std::size_t u = 0; u < grid.size(); ++u) {
      const double half = 0.5 * grid.weight(u);
      double off = std::remainder(phi - grid.angle(u), kTwoPi);
      off = std::clamp(off, -half, half);
      best = std::max(best, ray_supremum(body.t(u), s, x, unit_vector(grid.angle(u) + off)));
    }
    return best;
  }
  const int steps = 2 * (samples.per_sector / 2 + 1);  // even, so the center is hit
  for (std::size_t u = 0; u < grid.size(); ++u) {
    const double w = grid.weight(u);
    const double start = grid.angle(u) - 0.5 * w;
    for (int k = 0; k <= steps; ++k) {
      const Point2 dir = unit_vector(start + w * k / steps);
      best = std::max(best, ray_supremum(gauge(body, dir), s, x, dir));
    }
  }
  return std::max(best, gauge(body, x));
}

double w1_slope_oracle(const Eigen::VectorXd& t, const Eigen::VectorXd& p, const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(t.size());
  if (p.size() != n || cost.rows() != n || cost.cols() != n) throw InvalidArgument("slope oracle: dimension mismatch");
  if (n < 2) throw InvalidArgument("slope oracle needs at least two atoms");
  double slope = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(p[i] > 0.0)) continue;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double diff = t[j] - t[i];
      if (cost(i, j) == 0.0) {
        if (diff > 0.0) return kInf;
        continue;
      }
      slope = std::max(slope, diff / cost(i, j));
    }
  }
  return slope;
}

}  // namespace starreg
