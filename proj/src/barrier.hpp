#pragma once

// Log-barrier Newton method for
//   min c^T z  s.t.  a_k^T z >= b_k  (sparse rows),  h_l(z) <= 0  (smooth convex).

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace starreg::detail {

struct LinearRow {
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;

  double slack(const Eigen::VectorXd& z) const;
  double dot(const Eigen::VectorXd& dz) const;
};

struct SmoothConstraint {
  std::function<double(const Eigen::VectorXd&)> value;
  // Fills the gradient and Hessian at z.
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)> derivatives;
};

struct BarrierOptions {
  double tau0 = 1.0;
  double mu = 10.0;
  double gap_tol = 1e-10;     // stop when (#constraints)/tau <= gap_tol
  double newton_tol = 1e-10;  // half squared Newton decrement
  double boundary_fraction = 0.99;
  double armijo = 0.25;
  int max_newton = 200;       // per centering step
  long max_iters = 20000;     // total Newton steps
};

struct BarrierResult {
  Eigen::VectorXd z;
  Eigen::VectorXd row_duals;     // multipliers of the linear rows
  Eigen::VectorXd smooth_duals;  // multipliers of the smooth constraints
  double tau = 0.0;
  long iterations = 0;
  double gap_bound = 0.0;
  std::vector<std::string> log;
};

class BarrierSolver {
 public:
  BarrierSolver(Eigen::VectorXd c, std::vector<LinearRow> rows, std::vector<SmoothConstraint> smooth);

  // z0 must be strictly feasible.
  BarrierResult solve(const Eigen::VectorXd& z0, const BarrierOptions& opts) const;

 private:
  bool strictly_feasible(const Eigen::VectorXd& z) const;
  // Barrier objective at z + alpha dz minus its value at z.
  double barrier_change(const Eigen::VectorXd& z, const Eigen::VectorXd& dz, double alpha, double tau) const;

  Eigen::VectorXd c_;
  std::vector<LinearRow> rows_;
  std::vector<SmoothConstraint> smooth_;
};

}  // namespace starreg::detail
