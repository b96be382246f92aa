#include "popdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef POPDYN_TRACE
#include <cstdio>
#define PD_TRACE(...) std::printf(__VA_ARGS__)
#else
#define PD_TRACE(...)
#endif

namespace popdyn {

FlowVector edm_field(const RateMatrix& T, const SimplexState& x) {
  // Inflow T'x minus outflow x_i * (row sum); the diagonal cancels.
  return T.transpose() * x.x - T.rowwise().sum().cwiseProduct(x.x);
}

FlowVector edm_field(const LearningRule& rule, const SimplexState& x,
                     const PayoffVector& p, double eps_tie) {
  return edm_field(eval_rule(rule, x, p, eps_tie), x);
}

namespace {

RateMatrix eval_rule_smoothed(const LearningRule& rule, const SimplexState& x,
                              const PayoffVector& p, double eps_tie,
                              double beta) {
  if (beta <= 0.0) return eval_rule(rule, x, p, eps_tie);
  switch (rule.kind) {
    case LearningRule::Kind::BestResponse:
      return eval_rule(LearningRule::logit(beta), x, p, eps_tie);
    case LearningRule::Kind::Hybrid: {
      const int n = p.dim();
      RateMatrix T = RateMatrix::Zero(n, n);
      if (rule.w_br > 0.0)
        T += rule.w_br * eval_rule(LearningRule::logit(beta), x, p, eps_tie);
      if (rule.w_sept > 0.0)
        T += rule.w_sept * eval_rule(*rule.sept_part, x, p, eps_tie);
      if (rule.w_ipc > 0.0)
        T += rule.w_ipc * eval_rule(*rule.ipc_part, x, p, eps_tie);
      return T;
    }
    default:
      return eval_rule(rule, x, p, eps_tie);
  }
}

double br_weight(const LearningRule& rule) {
  if (rule.kind == LearningRule::Kind::BestResponse) return 1.0;
  if (rule.kind == LearningRule::Kind::Hybrid) return rule.w_br;
  return 0.0;
}

// Non-BR flow components of a hybrid; zero for a pure best-response rule.
Vector smooth_flow(const LearningRule& rule, const SimplexState& x,
                   const PayoffVector& p, double eps_tie) {
  Vector v = Vector::Zero(p.dim());
  if (rule.kind != LearningRule::Kind::Hybrid) return v;
  if (rule.w_sept > 0.0)
    v += rule.w_sept * edm_field(*rule.sept_part, x, p, eps_tie);
  if (rule.w_ipc > 0.0)
    v += rule.w_ipc * edm_field(*rule.ipc_part, x, p, eps_tie);
  return v;
}

// Feedback gain pulling the tied payoffs back together. Stiff on purpose:
// proximity-triggered slides start with a payoff gap of order step * rate,
// and the gap (hence the dissipation-margin transient) decays like
// exp(-kappa t), so a large gain confines the transient to a few samples.
// Explicit stages stay stable as long as step * kappa is about 1.
constexpr double kSlideKappa = 1e3;

// Drift allowance for intermediate integrator states: one explicit step can
// push a coordinate negative by O(step * ||V||) before reprojection, which
// is legitimate; anything near 1 still signals a blow-up.
constexpr double kStepDrift = 1e-2;

// Filippov selection on the tied set M: the argmax mixture y supported on M
// for which the tied payoffs stay tied along V = w (y - x) + v_rest, i.e.
// (e_{M0} - e_i)' DF V = -kappa (p_{M0} - p_i) for i in M. Returns the full
// n-vector y, or nothing when the system is singular or w is zero.
std::optional<Vector> slide_selection(const Game& game, const LearningRule& rule,
                                      const SimplexState& x,
                                      const PayoffVector& p,
                                      const std::vector<int>& M,
                                      double eps_tie) {
  const int n = p.dim();
  const int m = static_cast<int>(M.size());
  const double w = br_weight(rule);
  if (w <= 0.0 || m < 2) return std::nullopt;

  const Vector v_rest = smooth_flow(rule, x, p, eps_tie);
  const Matrix A = game.jacobian(x);

  Matrix B(m, m);
  Vector rhs(m);
  B.row(0).setOnes();
  rhs(0) = 1.0;
  for (int j = 1; j < m; ++j) {
    const Vector c = A.row(M[0]) - A.row(M[j]);
    for (int i = 0; i < m; ++i) B(j, i) = w * c(M[i]);
    rhs(j) = -kSlideKappa * (p.p(M[0]) - p.p(M[j])) -
             c.dot(v_rest - w * x.x);
  }
  Eigen::FullPivLU<Matrix> lu(B);
  if (!lu.isInvertible()) return std::nullopt;
  const Vector y_m = lu.solve(rhs);
  Vector y = Vector::Zero(n);
  for (int i = 0; i < m; ++i) y(M[i]) = y_m(i);
  return y;
}

int strict_argmax(const Vector& p) {
  int m = 0;
  for (int i = 1; i < p.size(); ++i)
    if (p(i) > p(m)) m = i;
  return m;
}

}  // namespace

Trajectory simulate(const Game& game, const LearningRule& rule,
                    const SimplexState& x0, const IntegratorConfig& cfg) {
  if (cfg.step <= 0.0 || cfg.horizon <= 0.0)
    throw std::invalid_argument("step and horizon must be positive");
  if (!x0.feasible(1e-9))
    throw std::invalid_argument("initial state not on the simplex");

  const bool sliding = cfg.filippov && cfg.smoothing_beta <= 0.0 &&
                       br_weight(rule) > 0.0;

  // Tied strategies currently slid along; empty means free flight.
  std::vector<int> tied;

  const auto mode_field = [&](const Vector& x_raw) -> Vector {
    const SimplexState x = project_simplex(x_raw, kStepDrift);
    const PayoffVector p = game.payoff(x);
    if (!tied.empty()) {
      if (const auto y = slide_selection(game, rule, x, p, tied, cfg.eps_tie)) {
        return br_weight(rule) * (*y - x.x) +
               smooth_flow(rule, x, p, cfg.eps_tie);
      }
    }
    return edm_field(
        eval_rule_smoothed(rule, x, p, cfg.eps_tie, cfg.smoothing_beta), x);
  };

  // One explicit step of size dt from state v with the current mode's field.
  const auto advance = [&](const Vector& v, double dt) -> Vector {
    if (cfg.method == IntegratorConfig::Method::Euler) {
      return v + dt * mode_field(v);
    }
    const Vector k1 = mode_field(v);
    const Vector k2 = mode_field(v + 0.5 * dt * k1);
    const Vector k3 = mode_field(v + 0.5 * dt * k2);
    const Vector k4 = mode_field(v + dt * k3);
    return v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  // Revalidate the tied set at the current state: drop strategies whose
  // selection weight went negative; dissolve when fewer than two remain.
  const auto revalidate_slide = [&](const SimplexState& x,
                                    const PayoffVector& p) {
    while (tied.size() >= 2) {
      const auto y = slide_selection(game, rule, x, p, tied, cfg.eps_tie);
      if (!y) {
        tied.clear();
        return;
      }
      int worst = -1;
      double worst_w = -1e-10;
      for (std::size_t i = 0; i < tied.size(); ++i) {
        if ((*y)(tied[i]) < worst_w) {
          worst_w = (*y)(tied[i]);
          worst = static_cast<int>(i);
        }
      }
      if (worst < 0) return;
      PD_TRACE("drop %d (w=%.3g)\n", tied[worst], worst_w);
      tied.erase(tied.begin() + worst);
    }
    tied.clear();
  };

  const int stride = std::max(1, cfg.record_stride);
  Trajectory traj;
  traj.step = cfg.step * stride;
  traj.rule_id = rule.name();

  const long steps = static_cast<long>(std::llround(cfg.horizon / cfg.step));
  traj.samples.reserve(steps / stride + 2);

  SimplexState x = project_simplex(x0.x);
  const double h = cfg.step;
  for (long k = 0; k <= steps; ++k) {
    const PayoffVector p = game.payoff(x);
    if (k % stride == 0 || k == steps) {
      traj.samples.push_back({k * h, x.x, p.p, mode_field(x.x)});
    }
    if (k == steps) break;

    if (!sliding) {
      x = project_simplex(advance(x.x, h), kStepDrift);
      continue;
    }

    // Event-aware step: locate switching-surface crossings by bisection and
    // hand the remainder of the step to the sliding mode.
    double remaining = h;
    int events = 0;
    bool skip_event_check = false;
    while (remaining > 1e-9 * h) {
      const SimplexState here = x;
      const PayoffVector p_here = game.payoff(here);
      if (!tied.empty()) revalidate_slide(here, p_here);

      const Vector x_cand = advance(here.x, remaining);
      const SimplexState cand = project_simplex(x_cand, kStepDrift);
      if (skip_event_check || ++events > 20) {
        x = cand;
        break;
      }

      if (tied.empty()) {
        const int m0 = strict_argmax(p_here.p);

        // Proximity entry: a discrete trajectory can hug an attracting
        // switching surface from one side without its endpoint argmax ever
        // flipping, while the stage evaluations straddle the surface. Detect
        // this by the top-two payoff gap falling below one step's worth of
        // payoff motion with both one-sided fields pointing at the surface.
        {
          int second = -1;
          for (int i = 0; i < p_here.dim(); ++i) {
            if (i == m0) continue;
            if (second < 0 || p_here.p(i) > p_here.p(second)) second = i;
          }
          if (second >= 0) {
            const double gap = p_here.p(m0) - p_here.p(second);
            const Matrix A = game.jacobian(here);
            const Vector c = A.row(m0) - A.row(second);
            const Vector v_rest = smooth_flow(rule, here, p_here, cfg.eps_tie);
            const double w = br_weight(rule);
            Vector side_m = v_rest - w * here.x;
            side_m(m0) += w;
            Vector side_j = v_rest - w * here.x;
            side_j(second) += w;
            const double gdot_m = c.dot(side_m);
            const double gdot_j = c.dot(side_j);
            const double band =
                2.0 * remaining * std::max(std::abs(gdot_m), std::abs(gdot_j));
            if (gap < band && gdot_m < 0.0 && gdot_j > 0.0) {
              tied = {m0, second};
              revalidate_slide(here, p_here);
              if (!tied.empty()) {
                PD_TRACE("t=%.4f hug M={%d,%d} gap=%.3g\n", k * h, m0, second,
                         gap);
                continue;
              }
            }
          }
        }

        const int m1 = strict_argmax(game.payoff(cand).p);
        if (m1 == m0) {
          x = cand;
          break;
        }
        // Bisect the step fraction to land on {p_m1 = p_m0}.
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
          const double mid = 0.5 * (lo + hi);
          const SimplexState xs =
              project_simplex(advance(here.x, mid * remaining), kStepDrift);
          const Vector ps = game.payoff(xs).p;
          (ps(m1) - ps(m0) > 0.0 ? hi : lo) = mid;
        }
        x = project_simplex(advance(here.x, hi * remaining), kStepDrift);
        remaining *= 1.0 - hi;
        tied = {m0, m1};
        PD_TRACE("t=%.4f land M={%d,%d} frac=%.3g\n", k * h, m0, m1, hi);
        const PayoffVector p_land = game.payoff(x);
        revalidate_slide(x, p_land);
        // A transversal crossing has no valid slide: carry straight on.
        if (tied.empty()) { PD_TRACE("t=%.4f transversal\n", k * h); skip_event_check = true; }
      } else {
        // Sliding: watch for an outside strategy catching up to the tied set.
        const auto outside_gap = [&](const SimplexState& xs) {
          const Vector ps = game.payoff(xs).p;
          double gap = std::numeric_limits<double>::infinity();
          int who = -1;
          for (int i = 0; i < ps.size(); ++i) {
            if (std::find(tied.begin(), tied.end(), i) != tied.end()) continue;
            const double g = ps(tied.front()) - ps(i);
            if (g < gap) {
              gap = g;
              who = i;
            }
          }
          return std::pair<double, int>(gap, who);
        };
        const auto [gap_end, who] = outside_gap(cand);
        if (gap_end >= 0.0 || who < 0) {
          x = cand;
          break;
        }
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
          const double mid = 0.5 * (lo + hi);
          const SimplexState xs =
              project_simplex(advance(here.x, mid * remaining), kStepDrift);
          (outside_gap(xs).first < 0.0 ? hi : lo) = mid;
        }
        x = project_simplex(advance(here.x, lo * remaining), kStepDrift);
        remaining *= 1.0 - lo;
        PD_TRACE("t=%.4f join %d\n", k * h, who);
        tied.push_back(who);
      }
    }
  }
  return traj;
}

std::optional<double> convergence_time(const Trajectory& traj, double tol) {
  if (traj.samples.empty()) throw std::invalid_argument("empty trajectory");
  const Vector& x_final = traj.samples.back().x;
  for (const auto& s : traj.samples) {
    if ((s.x - x_final).lpNorm<1>() < tol) return s.t;
  }
  return std::nullopt;
}

DerivativeEstimates derivative_estimates(const Trajectory& traj) {
  const std::size_t m = traj.samples.size();
  if (m < 3)
    throw std::invalid_argument("need at least 3 samples for derivatives");
  DerivativeEstimates est;
  est.x_dot.resize(m);
  est.p_dot.resize(m);
  const auto& s = traj.samples;
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t lo, hi;
    if (k == 0) {
      lo = 0;
      hi = 1;
    } else if (k == m - 1) {
      lo = m - 2;
      hi = m - 1;
    } else {
      lo = k - 1;
      hi = k + 1;
    }
    const double dt = s[hi].t - s[lo].t;
    est.x_dot[k] = (s[hi].x - s[lo].x) / dt;
    est.p_dot[k] = (s[hi].p - s[lo].p) / dt;
  }
  return est;
}

}  // namespace popdyn
