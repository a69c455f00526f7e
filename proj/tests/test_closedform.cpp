#include <cmath>
#include <random>

#include "doctest.h"
#include "starreg/closedform.hpp"
#include "starreg/error.hpp"

using namespace starreg;

namespace {

const double kPi = std::numbers::pi;

double objective(const std::vector<double>& alpha, const StarBody& k) {
  double v = 0.0;
  for (std::size_t u = 0; u < alpha.size(); ++u) v += alpha[u] * k.t(u);
  return v;
}

// Random feasible competitor: perturb t, then rescale to unit volume.
StarBody competitor(const StarBody& k, std::mt19937_64& rng, double size) {
  std::uniform_real_distribution<double> u(-size, size);
  std::vector<double> t(k.t().begin(), k.t().end());
  for (double& v : t) v *= std::exp(u(rng));
  const StarBody raw(k.grid(), t);
  return raw.scaled(1.0 / std::sqrt(volume_pc(raw)));
}

}  // namespace

TEST_CASE("eps0 optimizer on a uniform summary is the disk") {
  const SphereGrid g = make_uniform_grid(10);
  const StarBody k = optimal_star_eps0(sector_summary_uniform_circle(1.0, g));
  for (double t : k.t()) CHECK(t == doctest::Approx(std::sqrt(kPi)).epsilon(1e-14));
}

TEST_CASE("eps0 optimizer beats random unit-volume competitors") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  const SphereGrid g = make_uniform_grid(12);
  for (int trial = 0; trial < 20; ++trial) {
    SectorSummary s{g, std::vector<double>(12), 0.0};
    for (double& a : s.alpha) a = u(rng);
    const StarBody k = optimal_star_eps0(s);
    CHECK(volume_pc(k) == doctest::Approx(1.0).epsilon(1e-13));
    const double best = objective(s.alpha, k);
    for (int c = 0; c < 50; ++c) CHECK(objective(s.alpha, competitor(k, rng, 0.2)) >= best - 1e-12);
    // Radial form: rho^3 w / alpha is constant across sectors.
    const std::vector<double> rho = k.radial();
    for (int i = 1; i < 12; ++i) {
      CHECK(std::pow(rho[i], 3) / s.alpha[i] == doctest::Approx(std::pow(rho[0], 3) / s.alpha[0]).epsilon(1e-12));
    }
  }
}

TEST_CASE("eps0 optimizer reports empty sectors") {
  const SphereGrid g = make_uniform_grid(8);
  const AtomicDistribution d({{{1, 0}, 0.5}, {{-1, 0}, 0.5}});
  CHECK_THROWS_AS(optimal_star_eps0(sector_summary_atomic(d, g)), NonexistenceError);
}

TEST_CASE("critic with a positive summary and a loose cap") {
  const SphereGrid g = make_uniform_grid(8);
  const SignedSummary s{g, std::vector<double>(8, 0.125)};
  const CriticSolution sol = optimal_critic(s, 0.05);
  for (double t : sol.body.t()) CHECK(t == doctest::Approx(std::sqrt(kPi)).epsilon(1e-12));
  CHECK(std::none_of(sol.clamped.begin(), sol.clamped.end(), [](bool b) { return b; }));
  const CriticKktReport r = critic_kkt_report(sol, s, 0.05);
  CHECK(r.stationarity < 1e-12);
  CHECK(std::abs(r.volume_residual) < 1e-12);
}

TEST_CASE("critic clamps sectors with nonpositive weight") {
  const SphereGrid g = make_uniform_grid(4);
  const SignedSummary s{g, {0.5, -0.2, 0.0, 0.3}};
  const double eps = 0.2;
  const CriticSolution sol = optimal_critic(s, eps);
  CHECK(sol.clamped == std::vector<bool>{false, true, true, false});
  CHECK(sol.body.t(1) == doctest::Approx(1.0 / eps));
  CHECK(volume_pc(sol.body) == doctest::Approx(1.0).epsilon(1e-12));
  const CriticKktReport r = critic_kkt_report(sol, s, eps);
  CHECK(r.min_clamp_dual >= 0.0);
  CHECK(r.stationarity < 1e-12);
  CHECK(r.case_mismatch < 1e-12);

  // Brute-force oracle: t_0 determines t_3 through the volume constraint.
  double best = 1e300;
  const double w = kPi / 2;
  const double budget = 1.0 - 0.5 * w * 2 * eps * eps;
  for (int k = 1; k < 200000; ++k) {
    const double r0 = std::sqrt(budget / (0.5 * w)) * k / 200000.0;
    const double r3sq = budget / (0.5 * w) - r0 * r0;
    if (r0 < eps || r3sq < eps * eps) continue;
    best = std::min(best, 0.5 / r0 + 0.3 / std::sqrt(r3sq) - 0.2 / eps);
  }
  CHECK(objective(s.sigma, sol.body) <= best + 1e-9);
  CHECK(objective(s.sigma, sol.body) == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("critic with no positive weight returns the ball") {
  const SphereGrid g = make_uniform_grid(6);
  const CriticSolution sol = optimal_critic({g, std::vector<double>(6, -0.1)}, 0.3);
  for (double t : sol.body.t()) CHECK(t == doctest::Approx(1.0 / 0.3));
  CHECK(sol.lambda_star == 0.0);
}

TEST_CASE("critic rejects a ball of volume above one") {
  const SphereGrid g = make_uniform_grid(6);
  CHECK_THROWS_AS(optimal_critic({g, std::vector<double>(6, 0.1)}, 1.0), InfeasibleError);
  CHECK_THROWS_AS(optimal_critic({g, std::vector<double>(6, 0.1)}, 0.0), InvalidArgument);
}

TEST_CASE("convergence study on an anisotropic Gaussian") {
  const std::vector<int> ns{16, 32, 64};
  const std::vector<ConvergenceRow> rows = convergence_study(gaussian_density(1.0, 0.5, 0.3), ns);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].sup_error < rows[0].sup_error);
  CHECK(rows[2].sup_error < rows[1].sup_error);
  CHECK_THROWS_AS(convergence_study(gaussian_density(), std::vector<int>{32, 16}), InvalidArgument);
}
