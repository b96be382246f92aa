#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "popdyn/dynamics.hpp"
#include "popdyn/rules.hpp"
#include "popdyn/simplex.hpp"

namespace popdyn {

/// Storage/dissipation evaluator description. Mirrors the rule family being
/// audited: the shapes must match the rule's shapes.
struct StorageSpec {
  LearningRule rule;
  double quad_tol = 1e-10;

  static StorageSpec for_rule(const LearningRule& rule) {
    return StorageSpec{rule};
  }
};

/// Storage function S(x, p) >= 0 of the rule class. For hybrids the parts
/// combine with weights to the first power.
double storage(const StorageSpec& spec, const SimplexState& x,
               const PayoffVector& p);

/// Dissipation rate P(x, p) >= 0. For hybrids the parts combine with
/// squared weights; each part's rate uses the flow of that part alone.
double dissipation(const StorageSpec& spec, const SimplexState& x,
                   const PayoffVector& p);

/// Analytic gradient of S with respect to x.
Vector grad_x_storage(const StorageSpec& spec, const SimplexState& x,
                      const PayoffVector& p);

/// Which of the proved convex cones covers this rule at dimension n;
/// anything outside is reported as empirical evidence only.
std::string theorem_coverage(const LearningRule& rule, int n);

struct AuditOptions {
  double tol_scale = 1e-6;  // per-sample tol = tol_scale * (1 + |x'.p'|)
  double allowed_violation_fraction = 0.01;
  bool contractive_game = false;
};

struct PassivityAudit {
  long n_samples = 0;
  long violations = 0;
  double worst_margin = 0.0;  // min over samples of x'.p' - P - s'
  // Contractive-game extras (only filled when flagged contractive):
  long contractive_violations = 0;       // s' > -P + tol
  long monotonicity_violations = 0;      // s above its running min + tol
  double final_storage = 0.0;
  double max_storage = 0.0;
  bool pass = false;
  std::string theorem_coverage;
  std::string rule_id;
};

/// Checks the dissipation inequality s' <= x'.p' - P sample by sample with
/// finite-difference derivatives. The inequality is an almost-everywhere
/// statement, so a bounded fraction of flagged samples (spikes at payoff
/// ties) is tolerated.
PassivityAudit audit_trajectory(const Trajectory& traj, const StorageSpec& spec,
                                const AuditOptions& opts = {});

struct EquivalenceScanReport {
  long points_checked = 0;
  long mismatches = 0;
  double tol = 0.0;
  bool pass = false;
};

/// Verifies that S, P, and max(p) - p'x vanish together over a simplex grid
/// crossed with random payoff draws: values below tol count as zero, values
/// above tol^(1/4) as decisively nonzero, and a mismatch is a point where
/// one quantity is zero while another is decisively nonzero. The band in
/// between is inconclusive because the three quantities vanish at different
/// polynomial orders.
EquivalenceScanReport equivalence_scan(const StorageSpec& spec, int resolution,
                                       int payoff_samples, double tol,
                                       std::uint64_t seed = 1);

/// Worst value of (dS/dx) . V_BR over random samples off the tie set;
/// nonpositive for IPC/SEPT storages and their conic combinations.
double gradient_cone_check(const StorageSpec& spec, long samples,
                           std::uint64_t seed = 1);

struct PcReport {
  long samples = 0;
  double min_correlation = 0.0;  // min of p'V
  long violations = 0;           // ||V||_inf > 1e-6 but p'V <= 1e-12
  bool pass = false;
};

/// Positive correlation: p'V >= 0, strictly when the flow is nonzero.
PcReport pc_check(const LearningRule& rule, long samples,
                  std::uint64_t seed = 1, int n = 3);

}  // namespace popdyn
