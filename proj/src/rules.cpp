#include "popdyn/rules.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "popdyn/quadrature.hpp"

namespace popdyn {

namespace {
std::atomic<long> g_cap_hits{0};
}

long rate_cap_saturation_count() { return g_cap_hits.load(); }

RateShapeFunction RateShapeFunction::linear(double gain) {
  RateShapeFunction f;
  f.kind = Kind::Linear;
  f.gain = gain;
  return f;
}

RateShapeFunction RateShapeFunction::power(double gain, double exponent) {
  RateShapeFunction f;
  f.kind = Kind::Power;
  f.gain = gain;
  f.exponent = exponent;
  return f;
}

RateShapeFunction RateShapeFunction::table(std::vector<double> knots,
                                           std::vector<double> values) {
  if (knots.size() != values.size() || knots.size() < 2)
    throw std::invalid_argument("table shape needs matching knots/values, >= 2");
  if (knots.front() != 0.0 || values.front() != 0.0)
    throw std::invalid_argument("table shape must start at (0, 0)");
  RateShapeFunction f;
  f.kind = Kind::Table;
  f.knots = std::move(knots);
  f.values = std::move(values);
  return f;
}

double RateShapeFunction::operator()(double nu) const {
  if (nu <= 0.0) return 0.0;
  double raw = 0.0;
  switch (kind) {
    case Kind::Linear:
      raw = gain * nu;
      break;
    case Kind::Power:
      raw = gain * std::pow(nu, exponent);
      break;
    case Kind::Table: {
      if (nu >= knots.back()) {
        raw = values.back();
      } else {
        auto it = std::upper_bound(knots.begin(), knots.end(), nu);
        const std::size_t hi = it - knots.begin();
        const double t = (nu - knots[hi - 1]) / (knots[hi] - knots[hi - 1]);
        raw = values[hi - 1] + t * (values[hi] - values[hi - 1]);
      }
      break;
    }
  }
  if (raw > rate_cap) {
    ++g_cap_hits;
    return rate_cap;
  }
  return raw;
}

double RateShapeFunction::integral(double y, double quad_tol) const {
  if (y <= 0.0) return 0.0;
  switch (kind) {
    case Kind::Linear: {
      const double y_sat = rate_cap / gain;
      if (y <= y_sat) return 0.5 * gain * y * y;
      return 0.5 * gain * y_sat * y_sat + rate_cap * (y - y_sat);
    }
    case Kind::Power: {
      const double y_sat = std::pow(rate_cap / gain, 1.0 / exponent);
      if (y <= y_sat)
        return gain * std::pow(y, exponent + 1.0) / (exponent + 1.0);
      return gain * std::pow(y_sat, exponent + 1.0) / (exponent + 1.0) +
             rate_cap * (y - y_sat);
    }
    case Kind::Table:
      return adaptive_simpson([this](double t) { return (*this)(t); }, 0.0, y,
                              quad_tol);
  }
  return 0.0;
}

LearningRule LearningRule::best_response() {
  LearningRule r;
  r.kind = Kind::BestResponse;
  return r;
}

LearningRule LearningRule::logit(double beta) {
  if (beta <= 0.0) throw std::invalid_argument("logit beta must be > 0");
  LearningRule r;
  r.kind = Kind::Logit;
  r.beta = beta;
  return r;
}

LearningRule LearningRule::ipc(std::vector<RateShapeFunction> phi) {
  if (phi.empty()) throw std::invalid_argument("ipc rule needs shapes");
  LearningRule r;
  r.kind = Kind::Ipc;
  r.phi = std::move(phi);
  return r;
}

LearningRule LearningRule::sept(std::vector<RateShapeFunction> phi) {
  if (phi.empty()) throw std::invalid_argument("sept rule needs shapes");
  LearningRule r;
  r.kind = Kind::Sept;
  r.phi = std::move(phi);
  return r;
}

LearningRule LearningRule::smith(double lambda) {
  return ipc({RateShapeFunction::linear(lambda)});
}

LearningRule LearningRule::bnn(double lambda) {
  return sept({RateShapeFunction::linear(lambda)});
}

LearningRule LearningRule::hybrid(double w_br, double w_sept, double w_ipc,
                                  LearningRule sept_part,
                                  LearningRule ipc_part) {
  if (w_br < 0.0 || w_sept < 0.0 || w_ipc < 0.0)
    throw std::invalid_argument("hybrid weights must be nonnegative");
  if (w_br + w_sept + w_ipc <= 0.0)
    throw std::invalid_argument("hybrid weights must not all be zero");
  if (sept_part.kind != Kind::Sept || ipc_part.kind != Kind::Ipc)
    throw std::invalid_argument("hybrid parts must be SEPT and IPC rules");
  LearningRule r;
  r.kind = Kind::Hybrid;
  r.w_br = w_br;
  r.w_sept = w_sept;
  r.w_ipc = w_ipc;
  r.sept_part = std::make_shared<const LearningRule>(std::move(sept_part));
  r.ipc_part = std::make_shared<const LearningRule>(std::move(ipc_part));
  return r;
}

const RateShapeFunction& LearningRule::phi_at(int j) const {
  if (phi.size() == 1) return phi.front();
  return phi.at(static_cast<std::size_t>(j));
}

std::string LearningRule::name() const {
  switch (kind) {
    case Kind::BestResponse:
      return "br";
    case Kind::Logit:
      return "logit";
    case Kind::Ipc:
      return "ipc";
    case Kind::Sept:
      return "sept";
    case Kind::Hybrid:
      return "hybrid";
  }
  return "?";
}

Vector logit_choice(const PayoffVector& p, double beta) {
  const double pmax = p.p.maxCoeff();
  Vector e = ((p.p.array() - pmax) / beta).exp();
  return e / e.sum();
}

RateMatrix eval_rule(const LearningRule& rule, const SimplexState& x,
                     const PayoffVector& p, double eps_tie) {
  if (!p.finite()) throw std::invalid_argument("non-finite payoff");
  const int n = p.dim();
  RateMatrix T = RateMatrix::Zero(n, n);
  switch (rule.kind) {
    case LearningRule::Kind::BestResponse: {
      const Vector y = best_response_profile(p, eps_tie).selection.x;
      T = y.transpose().replicate(n, 1);
      break;
    }
    case LearningRule::Kind::Logit: {
      const Vector y = logit_choice(p, rule.beta);
      T = y.transpose().replicate(n, 1);
      break;
    }
    case LearningRule::Kind::Ipc: {
      for (int j = 0; j < n; ++j) {
        const auto& phi = rule.phi_at(j);
        for (int i = 0; i < n; ++i) {
          T(i, j) = phi(p.p(j) - p.p(i));
        }
      }
      break;
    }
    case LearningRule::Kind::Sept: {
      const Vector p_hat = excess_payoff(x, p).p_hat;
      for (int j = 0; j < n; ++j) {
        T.col(j).setConstant(rule.phi_at(j)(p_hat(j)));
      }
      break;
    }
    case LearningRule::Kind::Hybrid: {
      if (rule.w_br > 0.0)
        T += rule.w_br * eval_rule(LearningRule::best_response(), x, p, eps_tie);
      if (rule.w_sept > 0.0)
        T += rule.w_sept * eval_rule(*rule.sept_part, x, p, eps_tie);
      if (rule.w_ipc > 0.0)
        T += rule.w_ipc * eval_rule(*rule.ipc_part, x, p, eps_tie);
      break;
    }
  }
  return T;
}

double logit_limit_check(const PayoffVector& p,
                         const std::vector<double>& betas) {
  if (betas.empty()) throw std::invalid_argument("need at least one beta");
  const double beta_max = *std::max_element(betas.begin(), betas.end());
  Vector sorted = p.p;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  const double gap = sorted(sorted.size() - 1) - sorted(sorted.size() - 2);
  if (gap <= 10.0 * beta_max)
    throw std::domain_error("payoff gap too small for limit check");
  const Vector y = best_response_profile(p, 0.0).selection.x;
  double worst = 0.0;
  for (double beta : betas) {
    worst = std::max(worst,
                     (logit_choice(p, beta) - y).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace popdyn
