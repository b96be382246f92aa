#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "popdyn/games.hpp"
#include "popdyn/rng.hpp"

using namespace popdyn;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}
}  // namespace

TEST_CASE("congestion payoffs at the simplex vertices") {
  const auto game = AffineCongestionGame::standard();
  const Vector p0 = game.payoff(SimplexState{vec({1, 0, 0})}).p;
  CHECK(p0(0) == doctest::Approx(-70.0));
  CHECK(p0(1) == doctest::Approx(-65.0));
  CHECK(p0(2) == doctest::Approx(-55.0));

  const Vector p1 = game.payoff(SimplexState{vec({0, 1, 0})}).p;
  CHECK(p1(0) == doctest::Approx(-30.5));
  CHECK(p1(1) == doctest::Approx(-55.5));
  CHECK(p1(2) == doctest::Approx(-25.0));

  const Vector p2 = game.payoff(SimplexState{vec({0, 0, 1})}).p;
  CHECK(p2(0) == doctest::Approx(-60.0));
  CHECK(p2(1) == doctest::Approx(-55.0));
  CHECK(p2(2) == doctest::Approx(-85.0));
}

TEST_CASE("congestion jacobian is the constant affine-latency matrix") {
  const auto game = AffineCongestionGame::standard();
  Matrix expected(3, 3);
  expected << 40.0, 0.5, 30.0, 10.0, 0.5, 0.0, 30.0, 0.0, 60.0;
  expected = -expected;
  for (const Vector& x :
       {vec({1, 0, 0}), vec({0.2, 0.3, 0.5}), vec({1.0 / 3, 1.0 / 3, 1.0 / 3})}) {
    const Matrix J = game.jacobian(SimplexState{x});
    CHECK((J - expected).lpNorm<Eigen::Infinity>() <= 1e-12);
    // Finite differences through the generic fallback agree.
    const Matrix J_fd = game.Game::jacobian(SimplexState{x});
    CHECK((J_fd - expected).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("zero-slope latencies give a zero jacobian") {
  const AffineCongestionGame flat(0, 20, 0, 15, 0, 10, 35, 1.0 / 20);
  CHECK(flat.jacobian(SimplexState{vec({0.2, 0.3, 0.5})})
            .lpNorm<Eigen::Infinity>() == 0.0);
  const ContractivityReport report = contractivity_check(flat, 10);
  CHECK(report.contractive);
  CHECK(report.max_eigenvalue <= 1e-10);
}

TEST_CASE("standard congestion game is contractive") {
  const auto game = AffineCongestionGame::standard();
  const ContractivityReport report = contractivity_check(game, 50);
  CHECK(report.contractive);
  CHECK(report.max_eigenvalue <= 1e-10);
  CHECK(report.slope_condition_holds);
  CHECK(report.uniform_slope_condition_holds);
  CHECK(4.0 * game.r_slope() >= game.g1_slope());
}

TEST_CASE("a steep-main-road variant fails the contractivity conditions") {
  const AffineCongestionGame steep(1e6, 20, 30, 15, 0, 10, 35, 1.0 / 20);
  const ContractivityReport report = contractivity_check(steep, 20);
  CHECK_FALSE(report.contractive);
  CHECK(report.max_eigenvalue > 0.0);
  CHECK_FALSE(report.slope_condition_holds);
  CHECK_FALSE(report.uniform_slope_condition_holds);
}

TEST_CASE("nash oracle finds the interior congestion equilibrium") {
  const auto game = AffineCongestionGame::standard();
  const NashSet set = nash_oracle(game);
  REQUIRE(set.equilibria.size() == 1);
  const NashPoint& ne = set.equilibria.front();
  CHECK(ne.gap < 1e-6);
  // All three payoffs tie at the equilibrium value.
  const Vector p = game.payoff(ne.x).p;
  CHECK(p.maxCoeff() - p.minCoeff() < 1e-4);
  CHECK(ne.x.x(0) == doctest::Approx(0.4979).epsilon(1e-2));
  CHECK(ne.x.x(1) == doctest::Approx(1.0 / 6).epsilon(1e-2));
  CHECK(ne.x.x(2) == doctest::Approx(0.3354).epsilon(1e-2));
}

TEST_CASE("constant-payoff games have zero gap everywhere") {
  const AffineGame game(Matrix::Zero(3, 3), vec({2, 2, 2}));
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    const SimplexState x{random_simplex_point(rng, 3)};
    CHECK(nash_gap(game, x) == doctest::Approx(0.0));
  }
  CHECK_FALSE(nash_oracle(game).equilibria.empty());
}

TEST_CASE("symmetric two-strategy stable game equilibrates at the center") {
  Matrix A(2, 2);
  A << -1, 0, 0, -1;
  const AffineGame game(A, vec({0, 0}));  // F(x) = (-x1, -x2)
  const NashSet set = nash_oracle(game);
  REQUIRE(set.equilibria.size() == 1);
  CHECK(set.equilibria.front().x.x(0) == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(set.equilibria.front().x.x(1) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("reported equilibria satisfy the defining gap bound") {
  const auto game = AffineCongestionGame::standard();
  for (const NashPoint& pt : nash_oracle(game).equilibria) {
    CHECK(nash_gap(game, pt.x) < 1e-6);
  }
}

TEST_CASE("projected payoff field removes the mean") {
  const auto game = AffineCongestionGame::standard();
  const auto grid = simplex_grid(3, 12);
  for (const auto& [x, f] : payoff_projection_field(game, grid)) {
    CHECK(std::abs(f.sum()) <= 1e-9);
    // Idempotent: re-projecting changes nothing.
    const Vector again = f.array() - f.mean();
    CHECK((again - f).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("projected field of a constant game vanishes") {
  const AffineGame game(Matrix::Zero(3, 3), vec({7, 7, 7}));
  for (const auto& [x, f] :
       payoff_projection_field(game, simplex_grid(3, 6))) {
    CHECK(f.lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("simplex grid has the expected lattice size and stays feasible") {
  // Number of compositions of r into n parts: C(r + n - 1, n - 1).
  CHECK(simplex_grid(3, 4).size() == 15);
  CHECK(simplex_grid(2, 10).size() == 11);
  CHECK(simplex_grid(4, 3).size() == 20);
  for (const Vector& x : simplex_grid(3, 7)) {
    CHECK(SimplexState{x}.feasible());
  }
}
