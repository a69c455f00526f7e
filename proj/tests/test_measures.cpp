#include <cmath>
#include <random>

#include "doctest.h"
#include "starreg/error.hpp"
#include "starreg/measures.hpp"

using namespace starreg;

namespace {

const double kPi = std::numbers::pi;

AtomicDistribution random_atoms(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> ang(0.0, kTwoPi), rad(0.5, 2.0), mass(0.1, 1.0);
  std::vector<Atom> atoms;
  for (int i = 0; i < k; ++i) atoms.push_back({unit_vector(ang(rng)) * rad(rng), mass(rng)});
  return AtomicDistribution::normalized(atoms);
}

}  // namespace

TEST_CASE("atomic distributions validate their masses") {
  CHECK_THROWS_AS(AtomicDistribution({{{1, 0}, 0.5}, {{0, 1}, 0.4}}), InvalidArgument);
  CHECK_THROWS_AS(AtomicDistribution({{{1, 0}, 1.2}, {{0, 1}, -0.2}}), InvalidArgument);
  CHECK_THROWS_AS(AtomicDistribution({{{0, 0}, 1.0}}), InvalidArgument);
  const AtomicDistribution d = AtomicDistribution::normalized({{{2, 0}, 1.0}, {{0, 1}, 3.0}});
  CHECK(d.masses()[0] == doctest::Approx(0.25));
  CHECK(d.mean_norm() == doctest::Approx(0.25 * 2 + 0.75));
}

TEST_CASE("atomic sector summary sums mass times norm") {
  const SphereGrid g = make_uniform_grid(4);
  const AtomicDistribution d({{{2, 0}, 0.5}, {{0.1, 0.05}, 0.25}, {{0, -3}, 0.25}});
  const SectorSummary s = sector_summary_atomic(d, g);
  CHECK(s.alpha[0] == doctest::Approx(1.0 + 0.25 * std::hypot(0.1, 0.05)));
  CHECK(s.alpha[1] == 0.0);
  CHECK(s.alpha[3] == doctest::Approx(0.75));
  CHECK(s.error == 0.0);
}

TEST_CASE("uniform disk summary matches the analytic moment") {
  // alpha_U = w / (pi R^2) * R^3 / 3
  const SphereGrid g = make_uniform_grid(16);
  const SectorSummary s = sector_summary_density(uniform_disk_density(2.0), g);
  for (double a : s.alpha) CHECK(a == doctest::Approx(g.weight(0) * 2.0 / (3.0 * kPi)).epsilon(1e-9));
}

TEST_CASE("isotropic Gaussian summary matches the analytic moment") {
  // alpha_U = w / (2 pi) * int r^2 exp(-r^2/2) dr = w / (2 pi) * sqrt(pi/2)
  const SphereGrid g = make_uniform_grid(12);
  const SectorSummary s = sector_summary_density(gaussian_density(), g);
  for (double a : s.alpha) CHECK(a == doctest::Approx(g.weight(0) / kTwoPi * std::sqrt(kPi / 2)).epsilon(1e-9));
  CHECK(s.error < 1e-9);
}

TEST_CASE("unnormalized densities are normalized by their mass") {
  const SphereGrid g = make_uniform_grid(8);
  const DensityOracle raw([](const Point2& x) { return 7.0 * std::exp(-0.5 * (x.x * x.x + x.y * x.y)); }, false);
  const SectorSummary a = sector_summary_density(raw, g);
  const SectorSummary b = sector_summary_density(gaussian_density(), g);
  for (std::size_t u = 0; u < g.size(); ++u) CHECK(a.alpha[u] == doctest::Approx(b.alpha[u]).epsilon(1e-9));
}

TEST_CASE("uniform circle summary") {
  const SphereGrid g = make_uniform_grid(5);
  const SectorSummary s = sector_summary_uniform_circle(3.0, g);
  for (double a : s.alpha) CHECK(a == doctest::Approx(3.0 / 5.0));
  const SignedSummary sig = signed_summary(s, s);
  for (double v : sig.sigma) CHECK(v == 0.0);
}

TEST_CASE("cost kinds") {
  const std::vector<Point2> pts{{1, 0}, {0, 2}, {-1, 0}};
  const CostMatrix arc = cost_matrix(pts, CostKind::Arc);
  CHECK(arc(0, 1) == doctest::Approx(kPi / 2));
  CHECK(arc(0, 2) == doctest::Approx(kPi));
  const CostMatrix e = cost_matrix(pts, CostKind::Euclid);
  CHECK(e(0, 1) == doctest::Approx(std::sqrt(5.0)));
  const CostMatrix sq = cost_matrix(pts, CostKind::SqEuclid);
  CHECK(sq(0, 1) == doctest::Approx(kPi * kPi / 4));
  CHECK(parse_cost_kind("euclid") == CostKind::Euclid);
  CHECK_THROWS_AS(parse_cost_kind("manhattan"), InvalidArgument);
  const CostMatrix dup = cost_matrix(std::vector<Point2>{{1, 0}, {2, 0}}, CostKind::Arc);
  CHECK(!dup.warnings.empty());
}

TEST_CASE("expected gauge") {
  const StarBody k(make_uniform_grid(4), {1.0, 2.0, 3.0, 4.0});
  const AtomicDistribution d({{{2, 0}, 0.5}, {{0, -1}, 0.5}});
  CHECK(expected_gauge(d, k) == doctest::Approx(0.5 * 2 + 0.5 * 4));
}

TEST_CASE("W1 between two Diracs is their cost") {
  const AtomicDistribution a({{{1, 0}, 1.0}});
  const AtomicDistribution b({{{0, 1}, 1.0}});
  CHECK(w1_distance(a, b, CostKind::Euclid) == doctest::Approx(std::sqrt(2.0)));
  CHECK(w1_distance(a, b, CostKind::Arc) == doctest::Approx(kPi / 2));
}

TEST_CASE("W1 on a line matches the CDF formula") {
  // Points on a ray: W1 = integral |F - G|.
  const std::vector<Point2> pts{{1, 0}, {2, 0}, {4, 0}};
  const CostMatrix c = cost_matrix(pts, CostKind::Euclid);
  Eigen::VectorXd p(3), q(3);
  p << 0.5, 0.5, 0.0;
  q << 0.0, 0.25, 0.75;
  // F - G on [1,2): 0.5, on [2,4): 0.75
  CHECK(w1_distance(p, q, c) == doctest::Approx(0.5 * 1 + 0.75 * 2).epsilon(1e-12));
}

TEST_CASE("W1 is a metric on random supports") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const int k = 2 + trial % 5;
    std::vector<Atom> pool;
    std::uniform_real_distribution<double> ang(0.0, kTwoPi), rad(0.5, 2.0), m(0.05, 1.0);
    for (int i = 0; i < k; ++i) pool.push_back({unit_vector(ang(rng)) * rad(rng), 1.0});
    std::vector<Point2> pts;
    for (const Atom& a : pool) pts.push_back(a.point);
    const CostMatrix c = cost_matrix(pts, CostKind::Euclid);
    auto draw = [&] {
      Eigen::VectorXd v(k);
      for (int i = 0; i < k; ++i) v[i] = m(rng);
      return Eigen::VectorXd(v / v.sum());
    };
    const Eigen::VectorXd a = draw(), b = draw(), d = draw();
    const double ab = w1_distance(a, b, c), ba = w1_distance(b, a, c);
    CHECK(std::abs(ab - ba) <= 1e-9);
    CHECK(std::abs(w1_distance(a, a, c)) <= 1e-9);
    CHECK(w1_distance(a, d, c) <= ab + w1_distance(b, d, c) + 1e-9);
  }
}

TEST_CASE("random atom helper stays valid") {
  std::mt19937_64 rng(1);
  const AtomicDistribution d = random_atoms(rng, 6);
  CHECK(d.masses().sum() == doctest::Approx(1.0));
}
