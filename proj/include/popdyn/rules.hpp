#pragma once

#include <memory>
#include <string>
#include <vector>

#include "popdyn/simplex.hpp"

namespace popdyn {

/// Scalar rate shape phi: [0, inf) -> [0, rate_cap], with phi(0) = 0 and
/// phi(nu) > 0 for nu > 0. Per-strategy shapes make up IPC and SEPT rules.
struct RateShapeFunction {
  enum class Kind { Linear, Power, Table };

  Kind kind = Kind::Linear;
  double gain = 1.0;      // Linear and Power
  double exponent = 1.0;  // Power
  std::vector<double> knots;   // Table: nondecreasing, knots[0] == 0
  std::vector<double> values;  // Table: values[0] == 0
  double rate_cap = 1e6;

  static RateShapeFunction linear(double gain);
  static RateShapeFunction power(double gain, double exponent);
  static RateShapeFunction table(std::vector<double> knots,
                                 std::vector<double> values);

  /// phi(nu), saturated at rate_cap.
  double operator()(double nu) const;

  /// Antiderivative Phi(y) = integral of phi over [0, y]; 0 for y <= 0.
  /// Closed form for Linear/Power, adaptive Simpson for Table.
  double integral(double y, double quad_tol = 1e-10) const;
};

/// Number of times any shape evaluation hit its rate cap since start.
long rate_cap_saturation_count();

/// Tagged learning-rule description. Hybrid combines a BR part with SEPT
/// and IPC parts under nonnegative weights.
struct LearningRule {
  enum class Kind { BestResponse, Logit, Ipc, Sept, Hybrid };

  Kind kind = Kind::BestResponse;
  double beta = 0.0;                   // Logit noise parameter
  std::vector<RateShapeFunction> phi;  // Ipc/Sept: size 1 (shared) or n
  double w_br = 0.0, w_sept = 0.0, w_ipc = 0.0;  // Hybrid weights
  std::shared_ptr<const LearningRule> sept_part;
  std::shared_ptr<const LearningRule> ipc_part;

  static LearningRule best_response();
  static LearningRule logit(double beta);
  static LearningRule ipc(std::vector<RateShapeFunction> phi);
  static LearningRule sept(std::vector<RateShapeFunction> phi);
  static LearningRule smith(double lambda = 1.0);
  static LearningRule bnn(double lambda = 1.0);
  static LearningRule hybrid(double w_br, double w_sept, double w_ipc,
                             LearningRule sept_part, LearningRule ipc_part);

  /// Shape for target strategy j (shared shape broadcast if only one given).
  const RateShapeFunction& phi_at(int j) const;

  std::string name() const;
};

/// Softmax selection with the max-shift trick; the beta -> 0 limit of this
/// is the uniform best-response selection.
Vector logit_choice(const PayoffVector& p, double beta);

/// Switch-rate matrix of a rule at (x, p).
RateMatrix eval_rule(const LearningRule& rule, const SimplexState& x,
                     const PayoffVector& p, double eps_tie = 1e-9);

/// Max deviation ||logit_beta(p) - Y(p)||_inf over the given betas.
/// Requires a unique maximizer well separated from the runner-up.
double logit_limit_check(const PayoffVector& p,
                         const std::vector<double>& betas);

}  // namespace popdyn
