#include "barrier.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "starreg/error.hpp"

namespace starreg::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void push_log(std::vector<std::string>& log, const char* fmt, double a, double b, double c, long it) {
  char line[200];
  std::snprintf(line, sizeof line, fmt, it, a, b, c);
  log.emplace_back(line);
  if (log.size() > 64) log.erase(log.begin());
}

}  // namespace

double LinearRow::slack(const Eigen::VectorXd& z) const {
  double s = -rhs;
  for (const auto& [j, v] : terms) s += v * z[j];
  return s;
}

double LinearRow::dot(const Eigen::VectorXd& dz) const {
  double s = 0.0;
  for (const auto& [j, v] : terms) s += v * dz[j];
  return s;
}

BarrierSolver::BarrierSolver(Eigen::VectorXd c, std::vector<LinearRow> rows,
                             std::vector<SmoothConstraint> smooth)
    : c_(std::move(c)), rows_(std::move(rows)), smooth_(std::move(smooth)) {}

bool BarrierSolver::strictly_feasible(const Eigen::VectorXd& z) const {
  for (const LinearRow& r : rows_) {
    if (!(r.slack(z) > 0.0)) return false;
  }
  for (const SmoothConstraint& h : smooth_) {
    const double v = h.value(z);
    if (!(v < 0.0)) return false;
  }
  return true;
}

double BarrierSolver::barrier_change(const Eigen::VectorXd& z, const Eigen::VectorXd& dz, double alpha,
                                     double tau) const {
  double f = tau * alpha * c_.dot(dz);
  for (const LinearRow& r : rows_) {
    const double ratio = alpha * r.dot(dz) / r.slack(z);
    if (!(ratio > -1.0)) return kInf;
    f -= std::log1p(ratio);
  }
  const Eigen::VectorXd z1 = z + alpha * dz;
  for (const SmoothConstraint& h : smooth_) {
    const double v1 = h.value(z1);
    if (!(v1 < 0.0)) return kInf;
    f -= std::log(v1 / h.value(z));
  }
  return f;
}

BarrierResult BarrierSolver::solve(const Eigen::VectorXd& z0, const BarrierOptions& opts) const {
  if (!strictly_feasible(z0)) throw InvalidArgument("barrier: starting point is not strictly feasible");
  const int n = static_cast<int>(z0.size());
  const double m_total = static_cast<double>(rows_.size() + smooth_.size());
  BarrierResult res;
  Eigen::VectorXd z = z0;
  double tau = opts.tau0;
  long iters = 0;

  Eigen::VectorXd grad(n), hgrad(n), dz(n);
  Eigen::MatrixXd hess(n, n), hhess(n, n);
  for (;;) {
    for (int k = 0; k < opts.max_newton; ++k) {
      grad = tau * c_;
      hess.setZero();
      for (const LinearRow& r : rows_) {
        const double g = r.slack(z);
        const double ig = 1.0 / g;
        for (const auto& [i, vi] : r.terms) {
          grad[i] -= vi * ig;
          for (const auto& [j, vj] : r.terms) hess(i, j) += vi * vj * ig * ig;
        }
      }
      for (const SmoothConstraint& h : smooth_) {
        const double v = h.value(z);
        hgrad.setZero();
        hhess.setZero();
        h.derivatives(z, hgrad, hhess);
        grad += hgrad / (-v);
        hess += hhess / (-v) + hgrad * hgrad.transpose() / (v * v);
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
      dz = ldlt.solve(-grad);
      if (ldlt.info() != Eigen::Success || !dz.allFinite()) {
        const double reg = 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
        Eigen::MatrixXd hr = hess;
        hr.diagonal().array() += reg;
        dz = hr.ldlt().solve(-grad);
      }
      if (!dz.allFinite()) {
        throw SolverFailure("barrier: Newton system is singular", res.log,
                            std::vector<double>(z.data(), z.data() + n));
      }
      const double slope = grad.dot(dz);
      const double decrement = -0.5 * slope;
      if (decrement <= opts.newton_tol) break;

      double alpha = 1.0;
      for (const LinearRow& r : rows_) {
        const double d = r.dot(dz);
        if (d < 0.0) alpha = std::min(alpha, -opts.boundary_fraction * r.slack(z) / d);
      }
      double change = barrier_change(z, dz, alpha, tau);
      int backtracks = 0;
      while (!(change <= opts.armijo * alpha * slope)) {
        alpha *= 0.5;
        if (++backtracks > 60) break;
        change = barrier_change(z, dz, alpha, tau);
      }
      if (backtracks > 60) break;  // no further progress at this tau
      z += alpha * dz;
      if (++iters > opts.max_iters) {
        throw SolverFailure("barrier: iteration cap reached", res.log,
                            std::vector<double>(z.data(), z.data() + n), m_total / tau);
      }
      push_log(res.log, "newton %ld tau %.3e decrement %.3e step %.3e", tau, decrement, alpha, iters);
    }
    if (m_total / tau <= opts.gap_tol) break;
    tau *= opts.mu;
  }

  res.z = z;
  res.tau = tau;
  res.iterations = iters;
  res.gap_bound = m_total / tau;
  res.row_duals.resize(static_cast<int>(rows_.size()));
  for (std::size_t k = 0; k < rows_.size(); ++k) res.row_duals[k] = 1.0 / (tau * rows_[k].slack(z));
  res.smooth_duals.resize(static_cast<int>(smooth_.size()));
  for (std::size_t l = 0; l < smooth_.size(); ++l) res.smooth_duals[l] = 1.0 / (tau * -smooth_[l].value(z));
  return res;
}

}  // namespace starreg::detail
