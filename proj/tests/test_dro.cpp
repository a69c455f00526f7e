#include <cmath>
#include <random>

#include "doctest.h"
#include "starreg/closedform.hpp"
#include "starreg/dro.hpp"
#include "starreg/error.hpp"
#include "starreg/lp.hpp"

using namespace starreg;

namespace {

const double kPi = std::numbers::pi;

AtomicDistribution basis_data() {
  std::vector<Atom> atoms;
  for (int k = 0; k < 4; ++k) atoms.push_back({unit_vector(k * kPi / 2), 0.25});
  return AtomicDistribution(atoms);
}

AtomicDistribution random_atoms(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> ang(0.0, kTwoPi), rad(0.5, 1.5), mass(0.2, 1.0);
  std::vector<Atom> atoms;
  for (int i = 0; i < k; ++i) atoms.push_back({unit_vector(ang(rng)) * rad(rng), mass(rng)});
  return AtomicDistribution::normalized(atoms);
}

// Inner transport value of a body, evaluated from scratch on the completed support.
double robust_value(const DroProblem& pr, const StarBody& body) {
  const TransportSupport sup = complete_support(pr.dist, pr.grid);
  const Eigen::MatrixXd c = cost_matrix(sup.points, pr.cost).entries;
  const int k = static_cast<int>(sup.num_atoms);
  return inner_value(support_gauges(sup, body), sup.mass.head(k), c.topRows(k), pr.eps);
}

}  // namespace

TEST_CASE("support completion adds one point per empty sector") {
  const SphereGrid g = make_uniform_grid(8);
  const TransportSupport sup = complete_support(basis_data(), g);
  CHECK(sup.points.size() == 8);
  CHECK(sup.num_atoms == 4);
  for (std::size_t j = 4; j < 8; ++j) {
    CHECK(sup.mass[j] == 0.0);
    CHECK(sup.radius[j] == doctest::Approx(1.0));
  }
}

TEST_CASE("certificate and optimality against random competitors") {
  std::mt19937_64 rng(53);
  const SphereGrid g = make_uniform_grid(8);
  const DroProblem pr{g, random_atoms(rng, 5), CostKind::Euclid, 0.1};
  const DroSolution sol = solve_dro(pr);
  CHECK(sol.certificate_gap <= 1e-8);
  CHECK(sol.volume == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.constraint_residual <= 1e-12);
  CHECK(robust_value(pr, sol.body) == doctest::Approx(sol.objective).epsilon(1e-8));
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> t(sol.body.t().begin(), sol.body.t().end());
    for (double& v : t) v *= std::exp(u(rng));
    const StarBody raw(g, t);
    const StarBody k = raw.scaled(1.0 / std::sqrt(volume_pc(raw)));
    CHECK(robust_value(pr, k) >= sol.objective - 1e-7);
  }
}

TEST_CASE("eps zero dispatches to the closed form") {
  std::mt19937_64 rng(59);
  const SphereGrid g = make_uniform_grid(4);
  const AtomicDistribution d({{unit_vector(0.1), 0.3}, {unit_vector(1.7), 0.2}, {unit_vector(3.3), 0.4},
                              {unit_vector(4.9) * 2.0, 0.1}});
  const DroSolution sol = solve_dro({g, d, CostKind::Euclid, 0.0});
  const StarBody ref = optimal_star_eps0(sector_summary_atomic(d, g));
  CHECK(sup_norm_diff(sol.body.t(), ref.t()) == 0.0);
  CHECK(sol.objective == doctest::Approx(expected_gauge(d, ref)).epsilon(1e-12));
  CHECK_THROWS_AS(solve_dro({make_uniform_grid(8), d, CostKind::Euclid, 0.0}), NonexistenceError);
  CHECK_THROWS_AS(solve_dro({g, d, CostKind::Euclid, -1.0}), InvalidArgument);
}

TEST_CASE("large eps gives the uniform prior") {
  const DroSolution sol = solve_dro({make_uniform_grid(4), basis_data(), CostKind::Arc, 10.0});
  for (double t : sol.body.t()) CHECK(t == doctest::Approx(std::sqrt(kPi)).epsilon(1e-6));
}

TEST_CASE("objective is nondecreasing in eps and anisotropy falls") {
  const DroProblem pr{make_uniform_grid(32), basis_data(), CostKind::Arc, 0.0};
  const std::vector<double> eps{0.01, 0.05, 0.1, 0.2, 0.4};
  const std::vector<DroSolution> sols = epsilon_sweep(pr, eps);
  for (std::size_t i = 1; i < sols.size(); ++i) {
    CHECK(sols[i].objective >= sols[i - 1].objective - 1e-9);
    CHECK(sols[i].anisotropy() <= sols[i - 1].anisotropy() + 1e-9);
  }
  CHECK_THROWS_AS(epsilon_sweep(pr, std::vector<double>{0.2, 0.1}), InvalidArgument);
}

TEST_CASE("homogeneity of the dual triple") {
  std::mt19937_64 rng(61);
  const SphereGrid g = make_uniform_grid(8);
  const DroProblem pr{g, random_atoms(rng, 4), CostKind::Euclid, 0.2};
  const DroSolution sol = solve_dro(pr);
  // K -> cK divides the gauges by c; (lambda/c, s/c) stays feasible and the
  // objective divides by c.
  const double c = 2.0;
  const StarBody k2 = sol.body.scaled(c);
  const TransportSupport sup = complete_support(pr.dist, g);
  const Eigen::MatrixXd cost = cost_matrix(sup.points, pr.cost).entries;
  const Eigen::VectorXd gauges = support_gauges(sup, k2);
  double worst = 0.0;
  for (int i = 0; i < cost.rows(); ++i) {
    for (int j = 0; j < cost.cols(); ++j) worst = std::max(worst, gauges[j] - sol.s / c * cost(i, j) - sol.lambda[i] / c);
  }
  CHECK(worst <= 1e-12);
  const double scaled_obj = sol.s / c * pr.eps + sup.mass.dot(sol.lambda) / c;
  CHECK(scaled_obj == doctest::Approx(sol.objective / c).epsilon(1e-12));
  CHECK(robust_value(pr, k2) == doctest::Approx(sol.objective / c).epsilon(1e-8));
}

TEST_CASE("subgradient engine approaches the barrier optimum") {
  std::mt19937_64 rng(67);
  const DroProblem pr{make_uniform_grid(6), random_atoms(rng, 4), CostKind::Euclid, 0.15};
  const DroSolution barrier = solve_dro(pr);
  DroOptions o;
  o.engine = DroEngine::Subgradient;
  o.max_iters = 20000;
  const DroSolution sub = solve_dro(pr, o);
  CHECK(sub.certificate_gap <= 1e-4);
  CHECK(sub.objective >= barrier.objective - 1e-7);
  CHECK(sub.objective <= barrier.objective * (1 + 2e-2));
}

TEST_CASE("slope oracle examples") {
  Eigen::VectorXd t(2), p(2);
  t << 1, 2;
  p << 0.5, 0.5;
  Eigen::MatrixXd c(2, 2);
  c << 0, std::sqrt(2.0), std::sqrt(2.0), 0;
  const double slope = w1_slope_oracle(t, p, c);
  CHECK(slope == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(inner_value(t, p, c, 1e-3) == doctest::Approx(p.dot(t) + 1e-3 * slope).epsilon(1e-12));
  CHECK(w1_slope_oracle(Eigen::VectorXd::Constant(2, 3.0), p, c) == 0.0);
  CHECK(w1_slope_oracle(t, p, 2.0 * c) == doctest::Approx(slope / 2));
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  CHECK(std::isinf(w1_slope_oracle(t, p, zero)));
}

TEST_CASE("critic potential bounds and Lipschitz property") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.5, 2.0), ang(0.0, kTwoPi), rad(0.0, 3.0);
  const SphereGrid g = make_uniform_grid(8);
  std::vector<double> t(8);
  for (double& v : t) v = u(rng);
  const StarBody k(g, t);
  const double s = *std::max_element(t.begin(), t.end()) * 1.2;
  CHECK(critic_potential(k, s, Point2{0, 0}) == 0.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Point2 x = unit_vector(ang(rng)) * rad(rng);
    const Point2 y = unit_vector(ang(rng)) * rad(rng);
    const double lx = critic_potential(k, s, x), ly = critic_potential(k, s, y);
    CHECK(lx >= gauge(k, x) - 1e-8);
    CHECK(lx <= s * x.norm() + 1e-8);
    CHECK(std::abs(lx - ly) <= s * distance(x, y) + 1e-8);
  }
  CHECK_THROWS_AS(critic_potential(k, 0.0, Point2{1, 0}), InvalidArgument);
  CHECK(std::isinf(critic_potential(k, 0.9 * *std::min_element(t.begin(), t.end()), Point2{1, 0})));
}

TEST_CASE("critic potential matches a brute-force supremum over the plane") {
  const SphereGrid g = make_uniform_grid(4);
  const double s = 2.0;
  for (BodyKind kind : {BodyKind::PiecewiseConstant, BodyKind::HullPolytope}) {
    const StarBody k(g, {1.0, 1.5, 0.8, 1.2}, kind);
    for (const Point2& x : {Point2{0.7, 0.4}, Point2{-0.2, 1.3}, Point2{0.05, -0.9}}) {
      double scan = -1e300;
      for (int i = 0; i < 4000; ++i) {
        const Point2 dir = unit_vector(kTwoPi * i / 4000);
        const double gv = gauge(k, dir);
        for (int j = 0; j <= 600; ++j) {
          const double r = 3.0 * j / 600;
          scan = std::max(scan, gv * r - s * distance(x, dir * r));
        }
      }
      const double lam = critic_potential(k, s, x);
      CHECK(lam >= gauge(k, x) - 1e-12);
      if (kind == BodyKind::PiecewiseConstant) {
        CHECK(lam >= scan - 1e-12);
        CHECK(lam - scan < 5e-3);
      } else {
        CHECK(lam <= scan + 5e-3);
      }
    }
  }
}

TEST_CASE("critic DRO at zero radii equals the closed form") {
  const SphereGrid g = make_uniform_grid(8);
  std::vector<Atom> pa, qa;
  for (int u = 0; u < 8; ++u) {
    pa.push_back({unit_vector(g.angle(u)), 1.0 + u});
    qa.push_back({unit_vector(g.angle(u)) * 0.5, 1.0});
  }
  const AtomicDistribution p = AtomicDistribution::normalized(pa), q = AtomicDistribution::normalized(qa);
  const CriticDroSolution sol = solve_dro_critic({g, p, q, CostKind::Euclid, 0.0, 0.0, 0.2});
  const CriticSolution ref =
      optimal_critic(signed_summary(sector_summary_atomic(p, g), sector_summary_atomic(q, g)), 0.2);
  CHECK(sup_norm_diff(sol.body.t(), ref.body.t()) < 1e-12);
  CHECK(sol.certificate_gap < 1e-9);
}

TEST_CASE("critic DRO with P = Q fills the cap when it fits") {
  const SphereGrid g = make_uniform_grid(8);
  const AtomicDistribution p = basis_data();
  const CriticDroSolution sol = solve_dro_critic({g, p, p, CostKind::Euclid, 0.0, 0.0, 0.3});
  for (double t : sol.body.t()) CHECK(t == doctest::Approx(1 / 0.3));
}

TEST_CASE("critic DRO value grows with eps_q and stays certified") {
  std::mt19937_64 rng(73);
  const SphereGrid g = make_uniform_grid(8);
  const AtomicDistribution p = random_atoms(rng, 4), q = random_atoms(rng, 3);
  double prev = -1e300;
  for (double eq : {0.0, 0.05, 0.1, 0.3}) {
    const CriticDroSolution sol = solve_dro_critic({g, p, q, CostKind::Euclid, 0.1, eq, 0.3});
    CHECK(sol.certificate_gap <= 1e-8);
    CHECK(sol.objective >= prev - 1e-7);
    for (double t : sol.body.t()) CHECK(t <= 1 / 0.3 + 1e-9);
    CHECK(sol.volume <= 1.0 + 1e-9);
    prev = sol.objective;
  }
  CHECK_THROWS_AS(solve_dro_critic({g, p, q, CostKind::Euclid, 0.1, 0.1, 2.0}), InfeasibleError);
}
