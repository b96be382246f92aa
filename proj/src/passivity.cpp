#include "popdyn/passivity.hpp"

#include <algorithm>
#include <cmath>

#include "popdyn/rng.hpp"

namespace popdyn {

namespace {

double storage_br(const SimplexState& x, const PayoffVector& p) {
  return p.p.maxCoeff() - p.p.dot(x.x);
}

double storage_ipc(const LearningRule& rule, const SimplexState& x,
                   const PayoffVector& p, double quad_tol) {
  const int n = p.dim();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    if (x.x(i) == 0.0) continue;
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      row += rule.phi_at(j).integral(p.p(j) - p.p(i), quad_tol);
    }
    s += x.x(i) * row;
  }
  return s;
}

double storage_sept(const LearningRule& rule, const SimplexState& x,
                    const PayoffVector& p, double quad_tol) {
  const Vector p_hat = excess_payoff(x, p).p_hat;
  double s = 0.0;
  for (int j = 0; j < p.dim(); ++j) {
    s += rule.phi_at(j).integral(std::max(0.0, p_hat(j)), quad_tol);
  }
  return s;
}

double dissipation_ipc(const LearningRule& rule, const SimplexState& x,
                       const PayoffVector& p, double quad_tol) {
  const int n = p.dim();
  const Vector v = edm_field(rule, x, p);
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      row += rule.phi_at(j).integral(p.p(j) - p.p(i), quad_tol);
    }
    d -= v(i) * row;
  }
  return d;
}

double dissipation_sept(const LearningRule& rule, const SimplexState& x,
                        const PayoffVector& p) {
  const Vector p_hat = excess_payoff(x, p).p_hat;
  double total_rate = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    total_rate += rule.phi_at(i)(std::max(0.0, p_hat(i)));
  }
  const Vector v = edm_field(rule, x, p);
  return total_rate * p.p.dot(v);
}

Vector grad_ipc(const LearningRule& rule, const SimplexState&,
                const PayoffVector& p, double quad_tol) {
  const int n = p.dim();
  Vector g(n);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      row += rule.phi_at(j).integral(p.p(j) - p.p(i), quad_tol);
    }
    g(i) = row;
  }
  return g;
}

Vector grad_sept(const LearningRule& rule, const SimplexState& x,
                 const PayoffVector& p) {
  const Vector p_hat = excess_payoff(x, p).p_hat;
  double total_rate = 0.0;
  for (int j = 0; j < p.dim(); ++j) {
    total_rate += rule.phi_at(j)(std::max(0.0, p_hat(j)));
  }
  return -total_rate * p.p;
}

}  // namespace

double storage(const StorageSpec& spec, const SimplexState& x,
               const PayoffVector& p) {
  const LearningRule& r = spec.rule;
  switch (r.kind) {
    case LearningRule::Kind::BestResponse:
      return storage_br(x, p);
    case LearningRule::Kind::Ipc:
      return storage_ipc(r, x, p, spec.quad_tol);
    case LearningRule::Kind::Sept:
      return storage_sept(r, x, p, spec.quad_tol);
    case LearningRule::Kind::Hybrid: {
      double s = 0.0;
      if (r.w_br > 0.0) s += r.w_br * storage_br(x, p);
      if (r.w_sept > 0.0)
        s += r.w_sept * storage_sept(*r.sept_part, x, p, spec.quad_tol);
      if (r.w_ipc > 0.0)
        s += r.w_ipc * storage_ipc(*r.ipc_part, x, p, spec.quad_tol);
      return s;
    }
    case LearningRule::Kind::Logit:
      throw std::invalid_argument("no storage certificate for the logit rule");
  }
  return 0.0;
}

double dissipation(const StorageSpec& spec, const SimplexState& x,
                   const PayoffVector& p) {
  const LearningRule& r = spec.rule;
  switch (r.kind) {
    case LearningRule::Kind::BestResponse:
      return storage_br(x, p);
    case LearningRule::Kind::Ipc:
      return dissipation_ipc(r, x, p, spec.quad_tol);
    case LearningRule::Kind::Sept:
      return dissipation_sept(r, x, p);
    case LearningRule::Kind::Hybrid: {
      double d = 0.0;
      if (r.w_br > 0.0) d += r.w_br * r.w_br * storage_br(x, p);
      if (r.w_sept > 0.0)
        d += r.w_sept * r.w_sept * dissipation_sept(*r.sept_part, x, p);
      if (r.w_ipc > 0.0)
        d += r.w_ipc * r.w_ipc * dissipation_ipc(*r.ipc_part, x, p,
                                                 spec.quad_tol);
      return d;
    }
    case LearningRule::Kind::Logit:
      throw std::invalid_argument("no storage certificate for the logit rule");
  }
  return 0.0;
}

Vector grad_x_storage(const StorageSpec& spec, const SimplexState& x,
                      const PayoffVector& p) {
  const LearningRule& r = spec.rule;
  switch (r.kind) {
    case LearningRule::Kind::BestResponse:
      return -p.p;
    case LearningRule::Kind::Ipc:
      return grad_ipc(r, x, p, spec.quad_tol);
    case LearningRule::Kind::Sept:
      return grad_sept(r, x, p);
    case LearningRule::Kind::Hybrid: {
      Vector g = Vector::Zero(p.dim());
      if (r.w_br > 0.0) g -= r.w_br * p.p;
      if (r.w_sept > 0.0) g += r.w_sept * grad_sept(*r.sept_part, x, p);
      if (r.w_ipc > 0.0)
        g += r.w_ipc * grad_ipc(*r.ipc_part, x, p, spec.quad_tol);
      return g;
    }
    case LearningRule::Kind::Logit:
      throw std::invalid_argument("no storage certificate for the logit rule");
  }
  return Vector();
}

namespace {

bool is_linear_shapes(const LearningRule& r) {
  for (const auto& f : r.phi) {
    if (f.kind != RateShapeFunction::Kind::Linear) return false;
  }
  return true;
}

}  // namespace

std::string theorem_coverage(const LearningRule& rule, int n) {
  switch (rule.kind) {
    case LearningRule::Kind::BestResponse:
      return "br";
    case LearningRule::Kind::Ipc:
      return "ipc";
    case LearningRule::Kind::Sept:
      return "sept";
    case LearningRule::Kind::Logit:
      return "none (logit surrogate)";
    case LearningRule::Kind::Hybrid:
      if (rule.w_sept == 0.0) return "br+ipc cone";
      if (rule.w_ipc == 0.0 || is_linear_shapes(*rule.ipc_part))
        return "br+sept+smith cone";
      if (n == 2) return "br+sept+ipc cone (n=2)";
      return "empirical - no theorem coverage";
  }
  return "?";
}

PassivityAudit audit_trajectory(const Trajectory& traj, const StorageSpec& spec,
                                const AuditOptions& opts) {
  const std::size_t m = traj.samples.size();
  if (m < 3) throw std::invalid_argument("trajectory too short to audit");

  PassivityAudit audit;
  audit.rule_id = spec.rule.name();
  audit.theorem_coverage = theorem_coverage(spec.rule, traj.dim());

  std::vector<double> s(m), wp(m);
  for (std::size_t k = 0; k < m; ++k) {
    const SimplexState x{traj.samples[k].x};
    const PayoffVector p{traj.samples[k].p};
    s[k] = storage(spec, x, p);
    wp[k] = dissipation(spec, x, p);
  }

  const DerivativeEstimates der = derivative_estimates(traj);
  audit.n_samples = static_cast<long>(m);
  audit.worst_margin = std::numeric_limits<double>::infinity();
  audit.final_storage = s.back();
  audit.max_storage = *std::max_element(s.begin(), s.end());

  double running_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t lo = (k == 0) ? 0 : k - 1;
    std::size_t hi = (k == m - 1) ? m - 1 : k + 1;
    const double dt = traj.samples[hi].t - traj.samples[lo].t;
    const double s_dot = (s[hi] - s[lo]) / dt;
    const double supply = der.x_dot[k].dot(der.p_dot[k]);
    const double tol = opts.tol_scale * (1.0 + std::abs(supply));
    const double margin = supply - wp[k] - s_dot;
    audit.worst_margin = std::min(audit.worst_margin, margin);
    if (margin < -tol) ++audit.violations;
    if (opts.contractive_game) {
      if (s_dot > -wp[k] + tol) ++audit.contractive_violations;
      if (s[k] > running_min + tol) ++audit.monotonicity_violations;
    }
    running_min = std::min(running_min, s[k]);
  }

  const double allowed =
      opts.allowed_violation_fraction * static_cast<double>(m);
  audit.pass = audit.violations <= allowed;
  if (opts.contractive_game) {
    audit.pass = audit.pass && audit.contractive_violations <= allowed &&
                 audit.monotonicity_violations == 0;
  }
  return audit;
}

EquivalenceScanReport equivalence_scan(const StorageSpec& spec, int resolution,
                                       int payoff_samples, double tol,
                                       std::uint64_t seed) {
  if (resolution < 10) throw std::invalid_argument("resolution must be >= 10");
  const int n = 3;
  Rng rng(seed);
  EquivalenceScanReport report;
  report.tol = tol;
  const auto grid = simplex_grid(n, resolution);
  for (int sample = 0; sample < payoff_samples; ++sample) {
    const PayoffVector p{random_payoff(rng, n)};
    for (const Vector& xv : grid) {
      const SimplexState x{xv};
      const double s = storage(spec, x, p);
      const double d = dissipation(spec, x, p);
      const double gap = p.p.maxCoeff() - p.p.dot(x.x);
      // The three quantities vanish together but at different polynomial
      // orders in the payoff gap (integral storages are quadratic, the
      // excess-payoff dissipation cubic), so zero-ness cannot be decided by
      // one shared threshold right at the boundary. Values below tol count
      // as zero, values above tol^(1/4) as decisively nonzero; the band in
      // between is inconclusive and a mismatch requires a decisive
      // disagreement.
      const double decisive = std::pow(tol, 0.25);
      const double vals[3] = {s, d, gap};
      ++report.points_checked;
      bool mismatch = false;
      for (int a = 0; a < 3 && !mismatch; ++a) {
        for (int b = 0; b < 3; ++b) {
          if (vals[a] < tol && vals[b] > decisive) {
            mismatch = true;
            break;
          }
        }
      }
      if (mismatch) ++report.mismatches;
    }
  }
  report.pass = report.mismatches == 0;
  return report;
}

double gradient_cone_check(const StorageSpec& spec, long samples,
                              std::uint64_t seed) {
  Rng rng(seed);
  const int n = 3;
  double worst = -std::numeric_limits<double>::infinity();
  for (long k = 0; k < samples; ++k) {
    const SimplexState x{random_simplex_point(rng, n)};
    const PayoffVector p{random_payoff(rng, n)};
    const Vector v_br =
        edm_field(LearningRule::best_response(), x, p, /*eps_tie=*/0.0);
    worst = std::max(worst, grad_x_storage(spec, x, p).dot(v_br));
  }
  return worst;
}

PcReport pc_check(const LearningRule& rule, long samples, std::uint64_t seed,
                  int n) {
  Rng rng(seed);
  PcReport report;
  report.samples = samples;
  report.min_correlation = std::numeric_limits<double>::infinity();
  for (long k = 0; k < samples; ++k) {
    const SimplexState x{random_simplex_point(rng, n)};
    const PayoffVector p{random_payoff(rng, n)};
    const Vector v = edm_field(rule, x, p);
    const double corr = p.p.dot(v);
    report.min_correlation = std::min(report.min_correlation, corr);
    if (corr < -1e-12) ++report.violations;
    if (v.cwiseAbs().maxCoeff() > 1e-6 && corr <= 1e-12) ++report.violations;
  }
  report.pass = report.violations == 0;
  return report;
}

}  // namespace popdyn
