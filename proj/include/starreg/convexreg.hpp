#pragma once

// Convexity-constrained optimal regularizers in the plane. The body is the
// convex hull of the points u_i / t_i; linear triangle-area rows keep every
// point on the hull boundary.

#include <span>
#include <string>
#include <vector>

#include "starreg/geometry.hpp"
#include "starreg/measures.hpp"

namespace starreg {

// t_i D(i-1, i+1) <= t_{i-1} D(i, i+1) + t_{i+1} D(i-1, i), with
// D(a, b) = cos(theta_a) sin(theta_b) - cos(theta_b) sin(theta_a).
struct ConvexityRow {
  std::size_t prev = 0, center = 0, next = 0;
  double d_outer = 0.0;  // D(i-1, i+1)
  double d_right = 0.0;  // D(i, i+1)
  double d_left = 0.0;   // D(i-1, i)

  // Right side minus left side; nonnegative when satisfied.
  double slack(std::span<const double> t) const;
};

struct ConvexityConstraintSet {
  std::vector<ConvexityRow> rows;
  std::vector<std::string> warnings;
};

ConvexityConstraintSet build_convexity_constraints(const SphereGrid& grid);

struct ConvexOptions {
  double tol = 1e-10;  // barrier duality gap
  long max_iters = 20000;
};

struct ConvexSolution {
  StarBody body;                 // HullPolytope with volume 1
  std::vector<double> row_duals; // one per convexity row
  double volume_dual = 0.0;
  std::vector<bool> active;
  double objective = 0.0;        // sum a_i t_i
  double kkt_residual = 0.0;     // stationarity, sup norm
  long iterations = 0;
};

// Objective weights of E_P ||x||_K for a hull body: each atom splits its mass
// times norm between the two bracketing grid directions.
std::vector<double> convex_weights(const AtomicDistribution& dist, const SphereGrid& grid);

// min sum a_i t_i over hull bodies of volume at most 1.
ConvexSolution solve_convex_regularizer(std::span<const double> a, const SphereGrid& grid,
                                        const ConvexOptions& opts = {});

struct KktReport {
  double stationarity = 0.0;
  double min_dual = 0.0;
  double complementarity = 0.0;
  double primal_violation = 0.0;
  double volume_residual = 0.0;
  bool pass = false;
};

// Checks the KKT conditions of the body in `sol` with the duals in `sol`.
KktReport verify_kkt(const ConvexSolution& sol, std::span<const double> a, const SphereGrid& grid);

struct RobustnessReport {
  double lhs = 0.0;  // E_Q ||x||_{K_P}
  double rhs = 0.0;  // E_Q ||x||_{K_Q} + (Lip(K_P) + Lip(K_Q)) W1(P, Q)
  double lip_p = 0.0;
  double lip_q = 0.0;
  double w1 = 0.0;
  double gauge_diff = 0.0;  // sup |t_P - t_Q|
  bool holds = false;       // lhs <= rhs + 1e-8
};

RobustnessReport robustness_bound_check(const AtomicDistribution& p, const AtomicDistribution& q,
                                        const SphereGrid& grid, const ConvexOptions& opts = {});

}  // namespace starreg
