#include "popdyn/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "popdyn/dynamics.hpp"
#include "popdyn/passivity.hpp"
#include "popdyn/rng.hpp"

namespace popdyn {

Vector h_vector(const PayoffVector& p) {
  const int n = p.dim();
  Vector h = Vector::Zero(n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      const double d = p.p(j) - p.p(k);
      if (d > 0.0) h(k) += d * d;
    }
  }
  return h;
}

OrderedPayoffContext order_payoffs(const SimplexState& x,
                                   const PayoffVector& p) {
  const int n = p.dim();
  OrderedPayoffContext ctx;
  ctx.permutation.resize(n);
  std::iota(ctx.permutation.begin(), ctx.permutation.end(), 0);
  std::stable_sort(ctx.permutation.begin(), ctx.permutation.end(),
                   [&](int a, int b) { return p.p(a) < p.p(b); });
  ctx.p_sorted.resize(n);
  ctx.x_sorted.resize(n);
  for (int i = 0; i < n; ++i) {
    ctx.p_sorted(i) = p.p(ctx.permutation[i]);
    ctx.x_sorted(i) = x.x(ctx.permutation[i]);
  }
  const double avg = ctx.p_sorted.dot(ctx.x_sorted);
  ctx.threshold = n - 1;
  for (int j = 0; j < n; ++j) {
    if (ctx.p_sorted(j) >= avg) {
      ctx.threshold = j;
      break;
    }
  }
  const double p_thr = ctx.p_sorted(ctx.threshold);
  for (int j = 0; j < n; ++j) {
    if (ctx.p_sorted(j) > p_thr) ctx.above.push_back(j);
    if (ctx.p_sorted(j) < p_thr) ctx.below.push_back(j);
  }
  return ctx;
}

double j_value(const SimplexState& x, const PayoffVector& p,
               const LearningRule& sept_rule) {
  if (sept_rule.kind != LearningRule::Kind::Sept)
    throw std::invalid_argument("j_value needs a SEPT rule");
  const int n = p.dim();

  // h-form, in the original strategy order.
  const Vector h = h_vector(p);
  const Vector p_hat = excess_payoff(x, p).p_hat;
  Vector phi_vec(n);
  for (int j = 0; j < n; ++j)
    phi_vec(j) = sept_rule.phi_at(j)(std::max(0.0, p_hat(j)));
  const double h_form = h.dot(phi_vec - phi_vec.sum() * x.x);

  // Definitional form through the storage gradient and the flow.
  const StorageSpec smith_spec = StorageSpec::for_rule(LearningRule::smith(1.0));
  const Vector grad = grad_x_storage(smith_spec, x, p);
  const Vector v_sept = edm_field(sept_rule, x, p);
  const double definitional = 2.0 * grad.dot(v_sept);

  if (std::abs(h_form - definitional) > 1e-9 * (1.0 + std::abs(h_form)))
    throw std::logic_error("h-form and gradient-form disagree");
  return h_form;
}

MinMaxCheck minmax_check(const SimplexState& x, const PayoffVector& p) {
  const OrderedPayoffContext ctx = order_payoffs(x, p);
  const int n = p.dim();
  const Vector h = h_vector(PayoffVector{ctx.p_sorted});
  const int k = ctx.threshold;
  const double p_k = ctx.p_sorted(k);
  const double h_k = h(k);

  MinMaxCheck out;
  if (ctx.above.empty() || ctx.below.empty()) {
    out.vacuous = true;
    out.holds = true;
    out.lhs = -std::numeric_limits<double>::infinity();
    out.rhs = std::numeric_limits<double>::infinity();
    return out;
  }

  out.lhs = -std::numeric_limits<double>::infinity();
  for (int i : ctx.above)
    out.lhs = std::max(out.lhs, (h_k - h(i)) / (ctx.p_sorted(i) - p_k));
  out.rhs = std::numeric_limits<double>::infinity();
  for (int i : ctx.below)
    out.rhs = std::min(out.rhs, (h_k - h(i)) / (ctx.p_sorted(i) - p_k));

  // Closed forms: the min over the lower set is attained just below the
  // threshold; the max over the upper set at its smallest payoff.
  out.rhs_closed = 0.0;
  for (int j = k; j < n; ++j)
    out.rhs_closed += 2.0 * ctx.p_sorted(j) - ctx.p_sorted(k - 1) - p_k;
  const int k_bar = ctx.above.front();
  out.lhs_closed = 0.0;
  for (int j = k_bar; j < n; ++j)
    out.lhs_closed += 2.0 * ctx.p_sorted(j) - ctx.p_sorted(k_bar) - p_k;

  const double scale = 1.0 + std::abs(out.lhs) + std::abs(out.rhs);
  if (std::abs(out.lhs - out.lhs_closed) > 1e-9 * scale ||
      std::abs(out.rhs - out.rhs_closed) > 1e-9 * scale)
    throw std::logic_error("closed-form extrema disagree with direct scan");

  out.holds = out.lhs <= out.rhs + 1e-12 * scale;
  return out;
}

LPCertificate lp_certificate(const SimplexState& x, const PayoffVector& p,
                             double residual_tol) {
  const int n = p.dim();
  if ((p.p.array() == p.p(0)).all())
    throw std::invalid_argument("payoffs must not all be equal");

  const OrderedPayoffContext ctx = order_payoffs(x, p);
  const Vector ps = ctx.p_sorted;
  const Vector h = h_vector(PayoffVector{ps});
  const int k = ctx.threshold;
  const double p_k = ps(k);
  const double h_k = h(k);

  LPCertificate cert;
  cert.solution = Vector::Zero(n);
  cert.solution(k) = 1.0;
  cert.objective = h_k;

  cert.theta = 0.0;
  for (int i : ctx.above)
    cert.theta = std::max(cert.theta, (h_k - h(i)) / (ps(i) - p_k));
  cert.mu = -h_k - cert.theta * p_k;
  cert.gamma = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (ps(i) != p_k) cert.gamma(i) = h(i) + cert.theta * ps(i) + cert.mu;
  }

  // KKT residuals for L(z) = h'z - gamma'z + theta (p'z - p_k) + mu (1'z - 1).
  cert.stationarity_residual =
      (h - cert.gamma + cert.theta * ps + Vector::Constant(n, cert.mu))
          .cwiseAbs()
          .maxCoeff();
  cert.feasibility_residual =
      std::abs(cert.solution.sum() - 1.0) +
      std::max(0.0, ps.dot(cert.solution) - p_k) +
      std::max(0.0, -cert.solution.minCoeff());
  cert.slackness_residual =
      std::abs(cert.gamma.dot(cert.solution)) +
      std::abs(cert.theta * (ps.dot(cert.solution) - p_k));
  cert.dual_feasibility_residual =
      std::max(0.0, std::max(-cert.theta, -cert.gamma.minCoeff()));

  // Independent check: enumerate all vertices of the feasible polytope.
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (ps(i) <= p_k) best = std::min(best, h(i));
  }
  for (int i = 0; i < n; ++i) {
    if (ps(i) <= p_k) continue;
    for (int j = 0; j < n; ++j) {
      if (ps(j) >= p_k) continue;
      const double t = (p_k - ps(j)) / (ps(i) - ps(j));
      best = std::min(best, t * h(i) + (1.0 - t) * h(j));
    }
  }
  cert.enumeration_optimum = best;

  const double kkt = std::max({cert.stationarity_residual,
                               cert.feasibility_residual,
                               cert.slackness_residual,
                               cert.dual_feasibility_residual});
  cert.verified = kkt < residual_tol &&
                  best >= cert.objective - 1e-9 * (1.0 + std::abs(h_k)) &&
                  best <= cert.objective + 1e-9 * (1.0 + std::abs(h_k));
  return cert;
}

CrossTermReport cross_term_check(const LearningRule& ipc_rule,
                                 const LearningRule& sept_rule, long samples,
                                 int n, std::uint64_t seed) {
  if (ipc_rule.kind != LearningRule::Kind::Ipc ||
      sept_rule.kind != LearningRule::Kind::Sept)
    throw std::invalid_argument("cross term needs an IPC and a SEPT rule");
  Rng rng(seed);
  const StorageSpec ipc_spec = StorageSpec::for_rule(ipc_rule);
  const StorageSpec sept_spec = StorageSpec::for_rule(sept_rule);
  CrossTermReport report;
  report.samples = samples;
  report.worst = -std::numeric_limits<double>::infinity();
  for (long s = 0; s < samples; ++s) {
    const SimplexState x{random_simplex_point(rng, n)};
    const PayoffVector p{random_payoff(rng, n)};
    const double value =
        grad_x_storage(sept_spec, x, p).dot(edm_field(ipc_rule, x, p)) +
        grad_x_storage(ipc_spec, x, p).dot(edm_field(sept_rule, x, p));
    report.worst = std::max(report.worst, value);
  }
  report.verdict_applicable = (n == 2);
  report.pass = report.verdict_applicable && report.worst <= 1e-10;
  return report;
}

}  // namespace popdyn
