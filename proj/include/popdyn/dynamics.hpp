#pragma once

#include <optional>
#include <string>
#include <vector>

#include "popdyn/games.hpp"
#include "popdyn/rules.hpp"
#include "popdyn/simplex.hpp"

namespace popdyn {

struct TrajectorySample {
  double t = 0.0;
  Vector x;
  Vector p;
  Vector v;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double step = 0.0;
  std::string rule_id;
  std::string game_id;
  std::uint64_t seed = 0;

  int dim() const {
    return samples.empty() ? 0 : static_cast<int>(samples.front().x.size());
  }
  double horizon() const { return samples.empty() ? 0.0 : samples.back().t; }
};

struct IntegratorConfig {
  double step = 1e-3;
  double horizon = 10.0;
  enum class Method { Rk4, Euler } method = Method::Rk4;
  double eps_tie = 1e-9;
  /// Optional logit noise replacing the discontinuous best-response
  /// selection inside BR and hybrid rules; 0 disables smoothing.
  double smoothing_beta = 0.0;
  /// Store every record_stride-th integration step; the trajectory's sample
  /// spacing is step * record_stride.
  int record_stride = 1;
  /// Event-locate best-response switching surfaces and slide along them with
  /// the Filippov selection (the convex argmax mixture that keeps tied
  /// payoffs tied). Without this, fixed steps chatter around the switching
  /// set and the discrete solution hits a step-size-proportional floor.
  /// Only affects rules with a best-response component.
  bool filippov = true;
};

/// Net flow V_i = sum_j x_j T_ji - x_i T_ij with T = eval_rule(...).
FlowVector edm_field(const LearningRule& rule, const SimplexState& x,
                     const PayoffVector& p, double eps_tie = 1e-9);

/// Net flow from an already evaluated rate matrix.
FlowVector edm_field(const RateMatrix& T, const SimplexState& x);

/// Fixed-step integration of the closed loop x' = V(x, F(x)). Every stored
/// state is projected back onto the simplex; payoffs are stored as F(x).
Trajectory simulate(const Game& game, const LearningRule& rule,
                    const SimplexState& x0, const IntegratorConfig& cfg);

/// Earliest sample time t with ||x(t) - x(T)||_1 < tol. The final sample
/// qualifies by definition, so a nonempty trajectory always yields a time.
std::optional<double> convergence_time(const Trajectory& traj,
                                       double tol = 1e-3);

struct DerivativeEstimates {
  std::vector<Vector> x_dot;
  std::vector<Vector> p_dot;
};

/// Central differences in the interior, one-sided at the endpoints.
DerivativeEstimates derivative_estimates(const Trajectory& traj);

}  // namespace popdyn
