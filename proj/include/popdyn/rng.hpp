#pragma once

#include <cstdint>
#include <random>

#include "popdyn/simplex.hpp"

namespace popdyn {

using Rng = std::mt19937_64;

/// Uniform draw from the simplex (flat Dirichlet via exponential spacings).
inline Vector random_simplex_point(Rng& rng, int n) {
  std::exponential_distribution<double> exp_dist(1.0);
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = exp_dist(rng);
  return x / x.sum();
}

/// Boundary point: a uniform simplex draw with one random coordinate zeroed.
inline Vector random_boundary_point(Rng& rng, int n) {
  Vector x = random_simplex_point(rng, n);
  std::uniform_int_distribution<int> pick(0, n - 1);
  x(pick(rng)) = 0.0;
  return x / x.sum();
}

inline Vector random_payoff(Rng& rng, int n, double lo = -10.0,
                            double hi = 10.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector p(n);
  for (int i = 0; i < n; ++i) p(i) = dist(rng);
  return p;
}

}  // namespace popdyn
