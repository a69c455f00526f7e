#include "starreg/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "starreg/error.hpp"

namespace starreg {

namespace {

double radial_volume(const SphereGrid& grid, std::span<const double> rho) {
  const int d = grid.dim();
  double v = 0.0;
  for (std::size_t u = 0; u < rho.size(); ++u) v += grid.weight(u) * std::pow(rho[u], d);
  return v / d;
}

StarBody body_from_radial(const SphereGrid& grid, std::span<const double> rho) {
  std::vector<double> t(rho.size());
  for (std::size_t u = 0; u < rho.size(); ++u) t[u] = 1.0 / rho[u];
  return StarBody(grid, std::move(t), BodyKind::PiecewiseConstant);
}

// Radial function of the critic optimum at multiplier lambda (case formula).
std::vector<double> critic_radial(const SignedSummary& s, double eps, double lambda, std::vector<bool>* clamped) {
  const SphereGrid& g = s.grid;
  const int d = g.dim();
  std::vector<double> rho(g.size());
  if (clamped) clamped->assign(g.size(), true);
  for (std::size_t u = 0; u < g.size(); ++u) {
    const double threshold = std::pow(eps, d + 1) * d * g.weight(u) * lambda;
    if (s.sigma[u] > 0.0 && s.sigma[u] >= threshold) {
      rho[u] = std::pow(s.sigma[u] / (d * g.weight(u) * lambda), 1.0 / (d + 1));
      if (clamped) (*clamped)[u] = false;
    } else {
      rho[u] = eps;
    }
  }
  return rho;
}

}  // namespace

StarBody optimal_star_eps0(const SectorSummary& summary) {
  const SphereGrid& g = summary.grid;
  const int d = g.dim();
  if (summary.alpha.size() != g.size()) throw InvalidArgument("summary length does not match its grid");
  std::vector<double> rho(g.size());
  for (std::size_t u = 0; u < g.size(); ++u) {
    const double a = summary.alpha[u];
    if (!std::isfinite(a) || a < 0.0) throw InvalidArgument("sector summaries must be finite and nonnegative");
    if (a == 0.0) {
      throw NonexistenceError(
          "sector " + std::to_string(u) +
          " carries no data, so no optimal star body exists: the expected gauge keeps decreasing as "
          "volume moves into empty sectors and the body degenerates into spikes on the data. Use a "
          "robust (dro) or critic formulation, which bound the gauge away from zero");
    }
    rho[u] = std::pow(a / g.weight(u), 1.0 / (d + 1));
  }
  const double scale = std::pow(radial_volume(g, rho), 1.0 / d);
  for (double& r : rho) r /= scale;
  return body_from_radial(g, rho);
}

CriticSolution optimal_critic(const SignedSummary& sigma, double eps_ball) {
  const SphereGrid& g = sigma.grid;
  const int d = g.dim();
  if (!(eps_ball > 0.0) || !std::isfinite(eps_ball)) throw InvalidArgument("eps_ball must be positive");
  if (sigma.sigma.size() != g.size()) throw InvalidArgument("signed summary length does not match its grid");
  for (double s : sigma.sigma) {
    if (!std::isfinite(s)) throw InvalidArgument("signed summary has non-finite entries");
  }
  const std::vector<double> ball(g.size(), eps_ball);
  const double ball_volume = radial_volume(g, ball);
  if (ball_volume > 1.0 + 1e-12) {
    throw InfeasibleError("the ball of radius eps_ball has volume " + std::to_string(ball_volume) +
                          " > 1, so no unit-volume body contains it");
  }
  const bool any_positive = std::any_of(sigma.sigma.begin(), sigma.sigma.end(), [](double s) { return s > 0.0; });
  if (!any_positive) {
    CriticSolution sol{body_from_radial(g, ball), 0.0, std::vector<bool>(g.size(), true), ball_volume - 1.0};
    return sol;
  }

  auto volume_at = [&](double lambda) { return radial_volume(g, critic_radial(sigma, eps_ball, lambda, nullptr)); };
  double lo = 1.0, hi = 1.0;
  for (int k = 0; k < 2000 && volume_at(lo) <= 1.0; ++k) lo *= 0.5;
  for (int k = 0; k < 2000 && volume_at(hi) > 1.0; ++k) hi *= 2.0;
  for (int k = 0; k < 200 && hi / lo - 1.0 > 1e-15; ++k) {
    const double mid = std::sqrt(lo * hi);
    if (volume_at(mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  // With the clamp pattern fixed the volume equation is solvable exactly.
  double lambda = hi;
  std::vector<bool> clamped;
  critic_radial(sigma, eps_ball, std::sqrt(lo * hi), &clamped);
  double free_part = 0.0, clamped_part = 0.0;
  for (std::size_t u = 0; u < g.size(); ++u) {
    if (clamped[u]) {
      clamped_part += g.weight(u) * std::pow(eps_ball, d);
    } else {
      free_part += g.weight(u) * std::pow(sigma.sigma[u] / (d * g.weight(u)), static_cast<double>(d) / (d + 1));
    }
  }
  if (free_part > 0.0 && d - clamped_part > 0.0) {
    const double exact = std::pow(free_part / (d - clamped_part), (d + 1.0) / d);
    std::vector<bool> check;
    critic_radial(sigma, eps_ball, exact, &check);
    if (check == clamped) lambda = exact;
  }
  std::vector<double> rho = critic_radial(sigma, eps_ball, lambda, &clamped);
  CriticSolution sol{body_from_radial(g, rho), lambda, clamped, radial_volume(g, rho) - 1.0};
  return sol;
}

CriticKktReport critic_kkt_report(const CriticSolution& sol, const SignedSummary& sigma, double eps_ball) {
  const SphereGrid& g = sigma.grid;
  const int d = g.dim();
  CriticKktReport r;
  r.volume_residual = volume_pc(sol.body) - 1.0;
  r.min_clamp_dual = 0.0;
  const std::vector<double> expected = critic_radial(sigma, eps_ball, sol.lambda_star, nullptr);
  bool first_clamp = true;
  for (std::size_t u = 0; u < g.size(); ++u) {
    const double t = sol.body.t(u);
    const double rho = 1.0 / t;
    if (sol.clamped[u]) {
      const double mu = d * g.weight(u) * sol.lambda_star * std::pow(eps_ball, d + 1) - sigma.sigma[u];
      r.min_clamp_dual = first_clamp ? mu : std::min(r.min_clamp_dual, mu);
      first_clamp = false;
    } else {
      const double res = std::abs(sigma.sigma[u] - d * g.weight(u) * sol.lambda_star / std::pow(t, d + 1));
      r.stationarity = std::max(r.stationarity, res);
    }
    r.case_mismatch = std::max(r.case_mismatch, std::abs(rho - expected[u]) / expected[u]);
  }
  return r;
}

std::vector<ConvergenceRow> convergence_study(const DensityOracle& oracle, std::span<const int> n_list,
                                              const QuadratureParams& quad) {
  if (n_list.empty()) return {};
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw InvalidArgument("grid sizes must be ascending");
  }
  constexpr int d = 2;
  QuadratureParams fine = quad;
  fine.radial_panels *= 10;

  // Unit-volume normalization of the continuum body rho_P = (int r^d p)^{1/(d+1)}.
  const int n_dirs = 10 * n_list.back() * quad.angular_samples;
  std::vector<double> dirs(n_dirs);
  for (int k = 0; k < n_dirs; ++k) dirs[k] = kTwoPi * (k + 0.5) / n_dirs;
  const std::vector<double> moments = density_radial_moments(oracle, dirs, fine);
  double vol = 0.0;
  for (double m : moments) vol += std::pow(m, static_cast<double>(d) / (d + 1));
  vol *= kTwoPi / n_dirs / d;
  const double scale = std::pow(vol, 1.0 / d);

  std::vector<ConvergenceRow> rows;
  for (int n : n_list) {
    const SphereGrid grid = make_uniform_grid(n);
    const SectorSummary summary = sector_summary_density(oracle, grid, quad);
    const std::vector<double> rho_n = optimal_star_eps0(summary).radial();
    const std::vector<double> centers(grid.angles().begin(), grid.angles().end());
    const std::vector<double> m = density_radial_moments(oracle, centers, fine);
    std::vector<double> rho_hat(n);
    for (int u = 0; u < n; ++u) rho_hat[u] = std::pow(m[u], 1.0 / (d + 1)) / scale;
    ConvergenceRow row;
    row.n = n;
    row.sup_error = sup_norm_diff(rho_n, rho_hat);
    row.relative_error = row.sup_error / *std::max_element(rho_hat.begin(), rho_hat.end());
    row.quadrature_error = summary.error;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace starreg
