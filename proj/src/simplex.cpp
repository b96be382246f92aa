#include "popdyn/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace popdyn {

SimplexState project_simplex(const Vector& v, double max_drift) {
  if (v.size() < 2) throw std::invalid_argument("simplex dimension must be >= 2");
  if (!v.allFinite()) throw std::invalid_argument("non-finite state");

  Vector clamped = v.cwiseMax(0.0);
  const double negative_mass = (v - clamped).cwiseAbs().sum();
  const double sum = clamped.sum();
  const double drift = negative_mass + std::abs(sum - 1.0);
  if (drift > max_drift) {
    throw std::domain_error("state too far from the simplex (l1 drift " +
                            std::to_string(drift) + ")");
  }

  if (negative_mass == 0.0 && sum == 1.0) return SimplexState{v};

  clamped /= sum;
  // Push any remaining rounding residual into the largest component so that
  // the result sums to 1.0 exactly and a second projection is a no-op.
  for (int pass = 0; pass < 3; ++pass) {
    const double residual = 1.0 - clamped.sum();
    if (residual == 0.0) break;
    int imax;
    clamped.maxCoeff(&imax);
    clamped(imax) += residual;
  }
  return SimplexState{clamped};
}

ExcessPayoff excess_payoff(const SimplexState& x, const PayoffVector& p) {
  if (x.dim() != p.dim()) throw std::invalid_argument("dimension mismatch");
  const double mean = x.x.dot(p.p);
  return ExcessPayoff{p.p.array() - mean};
}

BestResponseProfile best_response_profile(const PayoffVector& p,
                                          double eps_tie) {
  if (!p.finite()) throw std::invalid_argument("non-finite payoff");
  if (eps_tie < 0.0) throw std::invalid_argument("eps_tie must be >= 0");

  const double pmax = p.p.maxCoeff();
  BestResponseProfile out;
  for (int i = 0; i < p.dim(); ++i) {
    if (p.p(i) >= pmax - eps_tie) out.argmax_set.push_back(i);
  }
  out.count = static_cast<int>(out.argmax_set.size());
  Vector y = Vector::Zero(p.dim());
  for (int i : out.argmax_set) y(i) = 1.0 / out.count;
  out.selection = SimplexState{std::move(y)};
  return out;
}

}  // namespace popdyn
