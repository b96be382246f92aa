#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "popdyn/dynamics.hpp"
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

Trajectory synthetic(int samples, double h,
                     const std::function<Vector(double)>& xf,
                     const std::function<Vector(double)>& pf) {
  Trajectory traj;
  traj.step = h;
  for (int k = 0; k < samples; ++k) {
    const double t = k * h;
    traj.samples.push_back({t, xf(t), pf(t), Vector::Zero(xf(t).size())});
  }
  return traj;
}

}  // namespace

TEST_CASE("uniform payoffs produce zero Smith flow") {
  Rng rng(2);
  for (int k = 0; k < 100; ++k) {
    const SimplexState x{random_simplex_point(rng, 3)};
    const FlowVector v = edm_field(LearningRule::smith(1.0), x,
                                   PayoffVector{vec({4, 4, 4})});
    CHECK(v.lpNorm<Eigen::Infinity>() <= 1e-14);
  }
}

TEST_CASE("best-response flow points at the unique maximizer") {
  Rng rng(4);
  for (int k = 0; k < 500; ++k) {
    const SimplexState x{random_simplex_point(rng, 4)};
    const Vector p = random_payoff(rng, 4);
    int arg = 0;
    p.maxCoeff(&arg);
    const FlowVector v =
        edm_field(LearningRule::best_response(), x, PayoffVector{p}, 0.0);
    Vector expected = -x.x;
    expected(arg) += 1.0;
    CHECK((v - expected).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("Smith flow drains a dominated monomorphic state") {
  const FlowVector v = edm_field(LearningRule::smith(1.0),
                                 SimplexState{vec({1, 0})},
                                 PayoffVector{vec({0, 2})});
  CHECK(v(0) == doctest::Approx(-2.0));
  CHECK(v(1) == doctest::Approx(2.0));
}

TEST_CASE("flows conserve mass and repel from the boundary") {
  Rng rng(8);
  const std::vector<LearningRule> families = {
      LearningRule::best_response(), LearningRule::smith(1.0),
      LearningRule::bnn(1.0),
      LearningRule::hybrid(1.0 / 3, 1.0 / 3, 1.0 / 3, LearningRule::bnn(1.0),
                           LearningRule::smith(1.0))};
  for (const auto& rule : families) {
    for (int k = 0; k < 10000; ++k) {
      const SimplexState x{random_simplex_point(rng, 3)};
      const PayoffVector p{random_payoff(rng, 3)};
      CHECK(std::abs(edm_field(rule, x, p).sum()) <= 1e-12);
    }
    for (int k = 0; k < 10000; ++k) {
      const Vector xb = random_boundary_point(rng, 3);
      const PayoffVector p{random_payoff(rng, 3)};
      const FlowVector v = edm_field(rule, SimplexState{xb}, p);
      for (int i = 0; i < 3; ++i) {
        if (xb(i) == 0.0) CHECK(v(i) >= -1e-14);
      }
    }
  }
}

TEST_CASE("equilibria are stationary for the closed loop") {
  const auto game = AffineCongestionGame::standard();
  const NashSet set = nash_oracle(game);
  REQUIRE_FALSE(set.equilibria.empty());
  const SimplexState ne = set.equilibria.front().x;
  IntegratorConfig cfg;
  cfg.horizon = 2.0;
  for (const auto& rule :
       {LearningRule::smith(1.0), LearningRule::bnn(1.0),
        LearningRule::best_response()}) {
    const Trajectory traj = simulate(game, rule, ne, cfg);
    CHECK((traj.samples.back().x - ne.x).lpNorm<1>() < 1e-4);
  }
}

TEST_CASE("hybrid run from a vertex converges before the horizon") {
  const auto game = AffineCongestionGame::standard();
  const LearningRule hybrid =
      LearningRule::hybrid(1.0 / 3, 1.0 / 3, 1.0 / 3, LearningRule::bnn(1.0),
                           LearningRule::smith(1.0));
  IntegratorConfig cfg;
  const Trajectory traj =
      simulate(game, hybrid, SimplexState{vec({1, 0, 0})}, cfg);
  const auto tc = convergence_time(traj);
  REQUIRE(tc.has_value());
  CHECK(*tc < 10.0);
  // The trajectory holds the simplex throughout.
  for (const auto& s : traj.samples) {
    CHECK(std::abs(s.x.sum() - 1.0) < 1e-9);
    CHECK(s.x.minCoeff() >= -1e-12);
  }
}

TEST_CASE("best-response run from a vertex converges before the horizon") {
  const auto game = AffineCongestionGame::standard();
  IntegratorConfig cfg;
  const Trajectory traj = simulate(game, LearningRule::best_response(),
                                   SimplexState{vec({1, 0, 0})}, cfg);
  const auto tc = convergence_time(traj);
  REQUIRE(tc.has_value());
  CHECK(*tc < 10.0);
}

TEST_CASE("convergence time of a constant trajectory is zero") {
  const Trajectory traj = synthetic(
      11, 0.1, [](double) { return Vector::Constant(3, 1.0 / 3); },
      [](double) { return Vector::Zero(3); });
  CHECK(convergence_time(traj) == 0.0);
}

TEST_CASE("the final sample always qualifies as converged") {
  // Walks straight away from the endpoint until the last sample.
  const Trajectory traj = synthetic(
      11, 0.1,
      [](double t) {
        Vector x(2);
        x << 0.05 * t, 1.0 - 0.05 * t;
        return x;
      },
      [](double) { return Vector::Zero(2); });
  CHECK(convergence_time(traj, 1e-3) == doctest::Approx(1.0));
}

TEST_CASE("derivative estimates recover linear trajectories exactly") {
  const Vector v = vec({0.02, -0.02});
  const Trajectory traj = synthetic(
      21, 0.05,
      [&](double t) { return (vec({0.4, 0.6}) + t * v).eval(); },
      [](double) { return Vector::Zero(2); });
  const auto est = derivative_estimates(traj);
  for (const auto& xd : est.x_dot) {
    CHECK((xd - v).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("central differences on quadratic payoffs have small error") {
  const double h = 1e-3;
  const Trajectory traj = synthetic(
      101, h, [](double) { return Vector::Constant(2, 0.5); },
      [](double t) {
        Vector p(2);
        p << t * t, 2.0 - 3.0 * t * t;
        return p;
      });
  const auto est = derivative_estimates(traj);
  for (std::size_t k = 1; k + 1 < est.p_dot.size(); ++k) {
    const double t = traj.samples[k].t;
    CHECK(std::abs(est.p_dot[k](0) - 2.0 * t) < 1e-6);
    CHECK(std::abs(est.p_dot[k](1) + 6.0 * t) < 1e-6);
  }
}

TEST_CASE("derivative estimates of a constant trajectory vanish") {
  const Trajectory traj = synthetic(
      9, 0.2, [](double) { return Vector::Constant(3, 1.0 / 3); },
      [](double) { return Vector::Constant(3, 2.0); });
  const auto est = derivative_estimates(traj);
  for (const auto& xd : est.x_dot) CHECK(xd.lpNorm<Eigen::Infinity>() == 0.0);
  for (const auto& pd : est.p_dot) CHECK(pd.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("halving the step moves smooth-rule endpoints by o(h)") {
  const auto game = AffineCongestionGame::standard();
  const LearningRule smith = LearningRule::smith(1.0);
  IntegratorConfig coarse;
  coarse.step = 2e-3;
  coarse.horizon = 4.0;
  IntegratorConfig fine = coarse;
  fine.step = 1e-3;
  const Vector end_coarse =
      simulate(game, smith, SimplexState{vec({1, 0, 0})}, coarse)
          .samples.back()
          .x;
  const Vector end_fine =
      simulate(game, smith, SimplexState{vec({1, 0, 0})}, fine)
          .samples.back()
          .x;
  CHECK((end_coarse - end_fine).lpNorm<1>() < 1e-8);
}

TEST_CASE("switching-surface tracking beats plain stepping at equilibrium") {
  const auto game = AffineCongestionGame::standard();
  const NashSet set = nash_oracle(game);
  REQUIRE_FALSE(set.equilibria.empty());
  const Vector ne = set.equilibria.front().x.x;

  IntegratorConfig tracked;
  IntegratorConfig plain;
  plain.filippov = false;
  const LearningRule br = LearningRule::best_response();
  const Vector end_tracked =
      simulate(game, br, SimplexState{vec({1, 0, 0})}, tracked)
          .samples.back()
          .x;
  const Vector end_plain =
      simulate(game, br, SimplexState{vec({1, 0, 0})}, plain)
          .samples.back()
          .x;
  CHECK((end_tracked - ne).lpNorm<1>() < 1e-6);
  // Plain fixed steps still get close, but chatter at a step-size floor.
  CHECK((end_plain - ne).lpNorm<1>() < 1e-1);
  CHECK((end_tracked - ne).lpNorm<1>() <= (end_plain - ne).lpNorm<1>());
}
