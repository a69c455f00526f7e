#pragma once

// Closed-form minimizers of the expected gauge over piecewise-constant star
// bodies of unit volume, with and without a signed (critic) measure.

#include <span>
#include <vector>

#include "starreg/geometry.hpp"
#include "starreg/measures.hpp"

namespace starreg {

// rho_U proportional to (alpha_U / w_U)^{1/(d+1)}, scaled to unit volume.
// Throws NonexistenceError when a sector carries no data.
StarBody optimal_star_eps0(const SectorSummary& summary);

struct CriticSolution {
  StarBody body;
  // Multiplier of the volume constraint, normalized so that unclamped sectors
  // satisfy sigma_U = d w_U lambda / t_U^{d+1}.
  double lambda_star = 0.0;
  std::vector<bool> clamped;
  double volume_residual = 0.0;  // volume - 1
};

// Minimizes sum sigma_U t_U over unit-volume bodies with rho_U >= eps_ball.
// Sectors clamp at eps_ball when sigma_U < eps_ball^{d+1} d w_U lambda.
CriticSolution optimal_critic(const SignedSummary& sigma, double eps_ball);

struct CriticKktReport {
  double stationarity = 0.0;     // max |sigma_U - d w_U lambda / t_U^{d+1}| over unclamped sectors
  double min_clamp_dual = 0.0;   // min mu_U = d w_U lambda eps^{d+1} - sigma_U over clamped sectors
  double case_mismatch = 0.0;    // max relative deviation from the case formula for rho_U
  double volume_residual = 0.0;
};

CriticKktReport critic_kkt_report(const CriticSolution& sol, const SignedSummary& sigma, double eps_ball);

struct ConvergenceRow {
  int n = 0;
  double sup_error = 0.0;       // max_U |rho_n(U) - rho_hat(theta_U)|
  double relative_error = 0.0;  // sup_error / max rho_hat
  double quadrature_error = 0.0;
};

// Compares the discretized optimizer on uniform grids of each size with the
// continuum optimizer sampled at sector centers. The continuum side uses ten
// times finer quadrature.
std::vector<ConvergenceRow> convergence_study(const DensityOracle& oracle, std::span<const int> n_list,
                                              const QuadratureParams& quad = {});

}  // namespace starreg
