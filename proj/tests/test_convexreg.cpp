#include <cmath>
#include <random>

#include "doctest.h"
#include "starreg/convexreg.hpp"
#include "starreg/error.hpp"

using namespace starreg;

namespace {

const double kPi = std::numbers::pi;

AtomicDistribution basis(const std::vector<double>& masses) {
  std::vector<Atom> atoms;
  for (int k = 0; k < 4; ++k) atoms.push_back({unit_vector(k * kPi / 2), masses[k]});
  return AtomicDistribution(atoms);
}

AtomicDistribution random_atoms(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> ang(0.0, kTwoPi), rad(0.5, 1.5), mass(0.2, 1.0);
  std::vector<Atom> atoms;
  for (int i = 0; i < k; ++i) atoms.push_back({unit_vector(ang(rng)) * rad(rng), mass(rng)});
  return AtomicDistribution::normalized(atoms);
}

// n = 4 oracle: the rows are vacuous, so minimize a.t on the volume surface
// by a coarse grid over (t0, t1, t2) followed by coordinate refinement, with
// t3 solved from the volume equation.
double grid_search_n4(const std::vector<double>& a) {
  auto t3_of = [](double t0, double t1, double t2) {
    const double rest = 2.0 - 1.0 / (t0 * t1) - 1.0 / (t1 * t2);
    return rest > 0.0 ? (1.0 / t2 + 1.0 / t0) / rest : -1.0;
  };
  auto f = [&](double t0, double t1, double t2) {
    const double t3 = t3_of(t0, t1, t2);
    return t3 > 0.0 ? a[0] * t0 + a[1] * t1 + a[2] * t2 + a[3] * t3 : 1e300;
  };
  double best = 1e300, b0 = 0, b1 = 0, b2 = 0;
  for (double t0 = 0.3; t0 < 4.0; t0 += 0.02) {
    for (double t1 = 0.3; t1 < 4.0; t1 += 0.02) {
      for (double t2 = 0.3; t2 < 4.0; t2 += 0.02) {
        const double v = f(t0, t1, t2);
        if (v < best) best = v, b0 = t0, b1 = t1, b2 = t2;
      }
    }
  }
  for (double h = 0.01; h > 1e-9; h *= 0.5) {
    for (bool improved = true; improved;) {
      improved = false;
      for (int d = 0; d < 3; ++d) {
        for (double sgn : {-1.0, 1.0}) {
          double c0 = b0, c1 = b1, c2 = b2;
          (d == 0 ? c0 : d == 1 ? c1 : c2) += sgn * h;
          const double v = f(c0, c1, c2);
          if (v < best - 1e-15) best = v, b0 = c0, b1 = c1, b2 = c2, improved = true;
        }
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("convexity rows on uniform grids") {
  const ConvexityConstraintSet s8 = build_convexity_constraints(make_uniform_grid(8));
  REQUIRE(s8.rows.size() == 8);
  for (const ConvexityRow& r : s8.rows) {
    CHECK(r.d_right == doctest::Approx(std::sin(kPi / 4)));
    CHECK(r.d_left == doctest::Approx(std::sin(kPi / 4)));
    CHECK(r.d_outer == doctest::Approx(1.0));
    CHECK(r.slack(std::vector<double>(8, 1.3)) > 0.0);
  }
  CHECK(s8.warnings.empty());
  const ConvexityConstraintSet s4 = build_convexity_constraints(make_uniform_grid(4));
  for (const ConvexityRow& r : s4.rows) CHECK(r.d_outer == 0.0);
  CHECK(s4.warnings.size() == 4);
  CHECK_THROWS_AS(build_convexity_constraints(make_uniform_grid(3)), InvalidArgument);
}

TEST_CASE("objective weights split atoms between neighbors") {
  const SphereGrid g = make_uniform_grid(4);
  const AtomicDistribution d({{unit_vector(kPi / 4) * 2.0, 1.0}});
  const std::vector<double> a = convex_weights(d, g);
  CHECK(a[0] == doctest::Approx(2.0 * std::sin(kPi / 4)));
  CHECK(a[1] == doctest::Approx(2.0 * std::sin(kPi / 4)));
  const StarBody k(g, {1.0, 2.0, 3.0, 4.0}, BodyKind::HullPolytope);
  CHECK(a[0] * 1.0 + a[1] * 2.0 == doctest::Approx(expected_gauge(d, k)));
}

TEST_CASE("uniform basis data gives the l1 ball") {
  const AtomicDistribution d = basis({0.25, 0.25, 0.25, 0.25});
  const SphereGrid g4 = make_uniform_grid(4);
  const ConvexSolution s4 = solve_convex_regularizer(convex_weights(d, g4), g4);
  for (double t : s4.body.t()) CHECK(t == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));

  const SphereGrid g16 = make_uniform_grid(16);
  const std::vector<double> a = convex_weights(d, g16);
  const ConvexSolution s16 = solve_convex_regularizer(a, g16);
  for (std::size_t i = 0; i < 16; ++i) {
    const Point2 u = g16.direction(i);
    CHECK(s16.body.t(i) == doctest::Approx(std::sqrt(2.0) * (std::abs(u.x) + std::abs(u.y))).epsilon(1e-9));
  }
  const KktReport r = verify_kkt(s16, a, g16);
  CHECK(r.pass);
  CHECK(r.stationarity <= 1e-9);
  CHECK(volume_polytope(s16.body) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weighted basis data matches a grid search") {
  const SphereGrid g = make_uniform_grid(4);
  const std::vector<double> a = convex_weights(basis({0.1, 0.2, 0.3, 0.4}), g);
  const ConvexSolution sol = solve_convex_regularizer(a, g);
  CHECK(sol.objective == doctest::Approx(grid_search_n4(a)).epsilon(1e-6));
  CHECK(volume_polytope(sol.body) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(verify_kkt(sol, a, g).pass);
}

TEST_CASE("KKT report detects a perturbed point") {
  const SphereGrid g = make_uniform_grid(8);
  std::mt19937_64 rng(83);
  const std::vector<double> a = convex_weights(random_atoms(rng, 5), g);
  ConvexSolution sol = solve_convex_regularizer(a, g);
  CHECK(verify_kkt(sol, a, g).pass);
  for (std::size_t r = 0; r < sol.active.size(); ++r) {
    if (!sol.active[r]) CHECK(sol.row_duals[r] == 0.0);
  }
  std::vector<double> t(sol.body.t().begin(), sol.body.t().end());
  t[2] *= 1.01;
  StarBody raw(g, t, BodyKind::HullPolytope);
  sol.body = raw.scaled(std::sqrt(volume_polytope(raw)));
  const KktReport bad = verify_kkt(sol, a, g);
  CHECK_FALSE(bad.pass);
  CHECK(bad.stationarity > 1e-4);
}

TEST_CASE("solutions are feasible and extremal where rows are strict") {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 10; ++trial) {
    const SphereGrid g = make_uniform_grid(12);
    const ConvexSolution sol = solve_convex_regularizer(convex_weights(random_atoms(rng, 4), g), g);
    const ConvexityConstraintSet rows = build_convexity_constraints(g);
    CHECK(volume_polytope(sol.body) == doctest::Approx(1.0).epsilon(1e-10));
    for (std::size_t r = 0; r < rows.rows.size(); ++r) {
      const double s = rows.rows[r].slack(sol.body.t());
      CHECK(s >= -1e-9);
      if (s > 1e-6) CHECK(gauge_polytope(sol.body, g.direction(r)) == doctest::Approx(sol.body.t(r)).epsilon(1e-10));
    }
  }
}

TEST_CASE("grid rotations permute the solution") {
  std::mt19937_64 rng(97);
  const SphereGrid g = make_uniform_grid(10);
  const AtomicDistribution d = random_atoms(rng, 5);
  std::vector<Atom> rotated = d.atoms();
  const int shift = 3;
  for (Atom& at : rotated) at.point = unit_vector(at.point.angle() + shift * kTwoPi / 10) * at.point.norm();
  const ConvexSolution a = solve_convex_regularizer(convex_weights(d, g), g);
  const ConvexSolution b = solve_convex_regularizer(convex_weights(AtomicDistribution(rotated), g), g);
  for (int i = 0; i < 10; ++i) CHECK(b.body.t((i + shift) % 10) == doctest::Approx(a.body.t(i)).epsilon(1e-9));
}

TEST_CASE("optimal value is concave in the weights") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SphereGrid g = make_uniform_grid(8);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::vector<double>> w(3, std::vector<double>(8));
    for (auto& v : w) for (double& x : v) x = u(rng);
    double l[3] = {u(rng), u(rng), u(rng)};
    const double sum = l[0] + l[1] + l[2];
    std::vector<double> mix(8, 0.0);
    double combo = 0.0;
    for (int k = 0; k < 3; ++k) {
      for (int i = 0; i < 8; ++i) mix[i] += l[k] / sum * w[k][i];
      combo += l[k] / sum * solve_convex_regularizer(w[k], g).objective;
    }
    CHECK(solve_convex_regularizer(mix, g).objective >= combo - 1e-8);
  }
}

TEST_CASE("weight validation") {
  const SphereGrid g = make_uniform_grid(5);
  CHECK_THROWS_AS(solve_convex_regularizer(std::vector<double>(5, 0.0), g), InvalidArgument);
  CHECK_THROWS_AS(solve_convex_regularizer(std::vector<double>{1, -1, 1, 1, 1}, g), InvalidArgument);
  CHECK_THROWS_AS(solve_convex_regularizer(std::vector<double>(4, 1.0), g), InvalidArgument);
}

TEST_CASE("robustness bound") {
  const SphereGrid g = make_uniform_grid(16);
  const AtomicDistribution p = basis({0.25, 0.25, 0.25, 0.25});
  const RobustnessReport same = robustness_bound_check(p, p, g);
  CHECK(same.holds);
  CHECK(same.lhs == doctest::Approx(same.rhs).epsilon(1e-9));
  CHECK(same.gauge_diff == 0.0);
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 10; ++trial) {
    const RobustnessReport r = robustness_bound_check(random_atoms(rng, 4), random_atoms(rng, 5), g);
    CHECK(r.holds);
  }
}
