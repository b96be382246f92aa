#pragma once

#include <vector>

#include "popdyn/rules.hpp"
#include "popdyn/simplex.hpp"

namespace popdyn {

/// h_k(p) = sum_j max(0, p_j - p_k)^2; nonincreasing in k once p is sorted.
Vector h_vector(const PayoffVector& p);

/// Payoff sorted ascending together with the threshold index splitting
/// strategies by the population-average payoff.
struct OrderedPayoffContext {
  std::vector<int> permutation;  // sorted index -> original index
  Vector p_sorted;
  Vector x_sorted;
  int threshold = 0;             // smallest j with p_j >= p'x (0-based)
  std::vector<int> above;        // j with p_j > p_threshold
  std::vector<int> below;        // j with p_j < p_threshold
};

OrderedPayoffContext order_payoffs(const SimplexState& x,
                                   const PayoffVector& p);

/// Directional derivative of the quadratic pairwise-comparison storage along
/// the SEPT flow, computed two ways: the h-form inner product and twice the
/// analytic gradient dotted with the flow. Throws if the two routes disagree
/// beyond 1e-9; returns the h-form value. Nonpositive everywhere.
double j_value(const SimplexState& x, const PayoffVector& p,
               const LearningRule& sept_rule);

struct MinMaxCheck {
  bool vacuous = false;  // one of the index sets is empty
  double lhs = 0.0;      // max over strategies above the threshold
  double rhs = 0.0;      // min over strategies below the threshold
  double lhs_closed = 0.0;
  double rhs_closed = 0.0;
  bool holds = false;
};

/// Evaluates the quotient inequality between the above/below index sets both
/// directly and via the closed-form sums; throws if the closed forms deviate
/// from the direct extrema by more than 1e-9.
MinMaxCheck minmax_check(const SimplexState& x, const PayoffVector& p);

struct LPCertificate {
  Vector solution;       // unit mass on the threshold strategy (sorted order)
  double objective = 0.0;
  double theta = 0.0;
  double mu = 0.0;
  Vector gamma;
  double stationarity_residual = 0.0;
  double feasibility_residual = 0.0;
  double slackness_residual = 0.0;
  double dual_feasibility_residual = 0.0;  // max(0, -min gamma, -theta)
  double enumeration_optimum = 0.0;
  bool verified = false;
};

/// Builds the KKT multipliers certifying that unit mass on the threshold
/// strategy solves min { h(p)'z : z on the simplex, p'z <= p_threshold },
/// and cross-checks against exhaustive vertex enumeration of the feasible
/// polytope (simplex vertices plus edge/halfspace intersections).
LPCertificate lp_certificate(const SimplexState& x, const PayoffVector& p,
                             double residual_tol = 1e-8);

struct CrossTermReport {
  long samples = 0;
  double worst = 0.0;
  bool verdict_applicable = false;  // only n = 2 carries a pass/fail verdict
  bool pass = false;
};

/// Worst value over random (x, p) of
/// (dS_sept/dx) . V_ipc + (dS_ipc/dx) . V_sept, nonpositive for n = 2.
CrossTermReport cross_term_check(const LearningRule& ipc_rule,
                                 const LearningRule& sept_rule, long samples,
                                 int n, std::uint64_t seed = 1);

}  // namespace popdyn
