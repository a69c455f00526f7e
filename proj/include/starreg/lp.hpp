#pragma once

// Dense two-phase primal simplex with primal/dual certificates, plus builders
// for the inner transport LP of the robust problem and its dual.

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace starreg {

enum class Sense { LessEqual, Equal, GreaterEqual };
enum class Direction { Minimize, Maximize };
enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

struct LinearProgram {
  Direction direction = Direction::Minimize;
  Eigen::VectorXd c;
  Eigen::MatrixXd a;
  std::vector<Sense> senses;
  Eigen::VectorXd b;
  Eigen::VectorXd lower;  // -inf allowed
  Eigen::VectorXd upper;  // +inf allowed

  LinearProgram() = default;
  // Zero objective and constraints, bounds [0, +inf).
  LinearProgram(int num_vars, int num_rows);

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }
  void validate() const;
};

struct LpOptions {
  double tol = 1e-9;
  long max_iters = 200000;
  // Consecutive degenerate pivots before switching to Bland's rule for good.
  int degenerate_switch = 50;
};

// Duals follow the Lagrangian of the stated direction: for a minimization,
// y_i >= 0 on >= rows and y_i <= 0 on <= rows; signs flip for a maximization.
// reduced_costs = c - A^T y.
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd reduced_costs;
  double objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementary_slackness = 0.0;
  long iterations = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
  double duality_gap() const { return std::abs(objective - dual_objective); }
};

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opts = {});
inline LpSolution solve_lp(const LinearProgram& lp, double tol) {
  LpOptions o;
  o.tol = tol;
  return solve_lp(lp, o);
}

// max <q, t>  s.t.  <C, pi> <= eps,  pi 1 = p,  pi^T 1 = q,  pi >= 0.
// C is sources x targets; variables are ordered (q, pi row-major).
LinearProgram build_inner_primal(const Eigen::VectorXd& t, const Eigen::VectorXd& p,
                                 const Eigen::MatrixXd& cost, double eps);

// min s eps + <p, lambda>  s.t.  s C_ij + lambda_i >= t_j,  s >= 0.
// Variables are ordered (s, lambda).
LinearProgram build_inner_dual(const Eigen::VectorXd& t, const Eigen::VectorXd& p,
                               const Eigen::MatrixXd& cost, double eps);

// Plain-text dump for cross-checking with external solvers. Format in README.
void write_lp_text(const LinearProgram& lp, std::ostream& out);
LinearProgram read_lp_text(std::istream& in);

}  // namespace starreg
