#pragma once

// Distributionally robust star-body regularizers over Wasserstein balls.
//
// The transport target set is the data support completed with one point per
// empty sector (at the sector center, at the mean data radius), so that an
// adversary can move mass into every sector of the grid.

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "starreg/geometry.hpp"
#include "starreg/measures.hpp"

namespace starreg {

enum class DroEngine {
  Barrier,     // log-barrier Newton on the epigraph form
  Subgradient  // projected subgradient on the max-of-affine objective
};

struct DroOptions {
  DroEngine engine = DroEngine::Barrier;
  double gap_tol = 1e-4;     // relative tolerance on the certificate gap
  long max_iters = 50000;    // outer iterations (Newton steps or subgradient steps)
  double barrier_tol = 1e-10;
  double floor = 1e-8;       // gauge floor for the subgradient engine
  std::size_t polish_row_limit = 1024;
};

struct DroProblem {
  SphereGrid grid;
  AtomicDistribution dist;
  CostKind cost = CostKind::Euclid;
  double eps = 0.0;
};

struct DroSolution {
  StarBody body;
  double s = 0.0;
  Eigen::VectorXd lambda;        // one entry per support point
  std::vector<Point2> support;   // atoms first, then completion points
  Eigen::VectorXd support_mass;
  double objective = 0.0;        // s eps + <p, lambda>
  double inner_value = 0.0;      // inner transport LP at the returned body
  double certificate_gap = 0.0;  // |objective - inner_value| / max(1, |inner_value|)
  double optimality_gap = 0.0;   // barrier duality bound (0 for closed-form paths)
  double constraint_residual = 0.0;
  double volume = 0.0;
  long iterations = 0;
  bool hit_floor = false;

  double anisotropy() const;
};

// Completed transport support and the per-point gauge coefficients.
struct TransportSupport {
  std::vector<Point2> points;
  std::vector<std::size_t> sector;
  Eigen::VectorXd radius;
  Eigen::VectorXd mass;  // data mass, zero on completion points
  std::size_t num_atoms = 0;
};

TransportSupport complete_support(const AtomicDistribution& dist, const SphereGrid& grid);

// Gauge values b_j t_{U(j)} on a support.
Eigen::VectorXd support_gauges(const TransportSupport& support, const StarBody& body);

// max <q, t> over the Wasserstein ball of radius eps around p (transport LP).
double inner_value(const Eigen::VectorXd& t, const Eigen::VectorXd& p, const Eigen::MatrixXd& cost, double eps);

DroSolution solve_dro(const DroProblem& problem, const DroOptions& opts = {});

struct CriticDroProblem {
  SphereGrid grid;
  AtomicDistribution dist_p;
  AtomicDistribution dist_q;
  CostKind cost = CostKind::Euclid;
  double eps_p = 0.0;
  double eps_q = 0.0;
  double eps_ball = 0.1;  // gauge cap t <= 1 / eps_ball
};

struct CriticDroSolution {
  StarBody body;
  double s_p = 0.0;
  double s_q = 0.0;
  Eigen::VectorXd lambda_p;
  Eigen::VectorXd lambda_q;
  double objective = 0.0;
  double inner_value = 0.0;
  double certificate_gap = 0.0;
  double optimality_gap = 0.0;
  double volume = 0.0;
  long iterations = 0;
};

CriticDroSolution solve_dro_critic(const CriticDroProblem& problem, const DroOptions& opts = {});

// One solution per radius; `eps_list` must be ascending.
std::vector<DroSolution> epsilon_sweep(const DroProblem& problem, std::span<const double> eps_list,
                                       const DroOptions& opts = {});

struct PotentialSamples {
  int per_sector = 8;  // hull bodies: directions per sector besides center and boundaries
};

// sup_y ||y||_K - s ||x - y||_2. Exact for piecewise-constant bodies; for hull
// bodies the supremum runs over rays through a fixed direction set and through
// x itself, which keeps it a lower bound that is s-Lipschitz in x and at least
// ||x||_K. Returns +inf when the gauge exceeds s somewhere on the circle.
double critic_potential(const StarBody& body, double s, const Point2& x, const PotentialSamples& samples = {});

// max over i with p_i > 0 and j != i of (t_j - t_i) / C_ij, clipped at 0:
// the right derivative of the inner value at eps = 0.
double w1_slope_oracle(const Eigen::VectorXd& t, const Eigen::VectorXd& p, const Eigen::MatrixXd& cost);

}  // namespace starreg
