#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace popdyn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kNumericSlack = 1e-12;

/// Population state on the probability simplex: x_i >= 0, sum x_i = 1.
struct SimplexState {
  Vector x;

  int dim() const { return static_cast<int>(x.size()); }

  bool feasible(double slack = kNumericSlack) const {
    return x.minCoeff() >= -slack && std::abs(x.sum() - 1.0) <= slack;
  }
};

/// Per-strategy payoff vector.
struct PayoffVector {
  Vector p;

  int dim() const { return static_cast<int>(p.size()); }
  bool finite() const { return p.allFinite(); }
};

/// Switch-rate matrix: T(i,j) is the rate from strategy i to j, entries >= 0.
/// The diagonal is ignored by the dynamics; convention is to leave it as
/// whatever the rule evaluation produces (it cancels in the net flow).
using RateMatrix = Matrix;

/// Net flow of agents per strategy; components sum to zero.
using FlowVector = Vector;

/// Excess payoff: p minus the population-average payoff x'p.
struct ExcessPayoff {
  Vector p_hat;
};

/// Maximal-payoff strategy set and the uniform selection over it.
struct BestResponseProfile {
  std::vector<int> argmax_set;
  int count = 0;
  SimplexState selection;
};

/// Repairs numeric drift off the simplex: clamp negatives, renormalize.
/// Rejects inputs farther than max_drift from the simplex in l1 distance,
/// which signals an integrator blow-up rather than roundoff.
SimplexState project_simplex(const Vector& v, double max_drift = 1e-6);

ExcessPayoff excess_payoff(const SimplexState& x, const PayoffVector& p);

/// M = { i : p_i >= max(p) - eps_tie }, uniform selection over M.
BestResponseProfile best_response_profile(const PayoffVector& p,
                                          double eps_tie = 1e-9);

}  // namespace popdyn
