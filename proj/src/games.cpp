#include "popdyn/games.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace popdyn {

Matrix Game::jacobian(const SimplexState& x) const {
  const int n = dim();
  const double step = 1e-6;
  Matrix J(n, n);
  for (int j = 0; j < n; ++j) {
    Vector hi = x.x, lo = x.x;
    hi(j) += step;
    lo(j) -= step;
    const Vector dp =
        payoff(SimplexState{hi}).p - payoff(SimplexState{lo}).p;
    J.col(j) = dp / (2.0 * step);
  }
  if (!J.allFinite()) throw std::runtime_error("non-finite game jacobian");
  return J;
}

AffineCongestionGame::AffineCongestionGame(double g1_slope, double g1_intercept,
                                           double g2_slope, double g2_intercept,
                                           double r_slope, double r_intercept,
                                           double walk_cost, double bus_factor)
    : g1_slope_(g1_slope),
      g1_intercept_(g1_intercept),
      g2_slope_(g2_slope),
      g2_intercept_(g2_intercept),
      r_slope_(r_slope),
      r_intercept_(r_intercept),
      walk_cost_(walk_cost),
      bus_factor_(bus_factor) {
  if (g1_slope_ < 0.0 || g2_slope_ < 0.0 || r_slope_ < 0.0)
    throw std::invalid_argument("latency slopes must be nonnegative");
  if (walk_cost_ <= 0.0) throw std::invalid_argument("walking cost must be > 0");
  if (bus_factor_ <= 0.0 || bus_factor_ >= 1.0)
    throw std::invalid_argument("bus factor must be in (0, 1)");
}

AffineCongestionGame AffineCongestionGame::standard() {
  return AffineCongestionGame(10.0, 20.0, 30.0, 15.0, 30.0, 10.0, 35.0,
                              1.0 / 20.0);
}

PayoffVector AffineCongestionGame::payoff(const SimplexState& x) const {
  const double main_load = x.x(0) + bus_factor_ * x.x(1);
  const double downtown_load = x.x(0) + x.x(2);
  const double g1 = g1_slope_ * main_load + g1_intercept_;
  const double g2 = g2_slope_ * x.x(2) + g2_intercept_;
  const double r = r_slope_ * downtown_load + r_intercept_;
  Vector p(3);
  p << -(g1 + r), -(g1 + walk_cost_), -(g2 + r);
  return PayoffVector{p};
}

Matrix AffineCongestionGame::jacobian(const SimplexState&) const {
  Matrix J(3, 3);
  J << g1_slope_ + r_slope_, bus_factor_ * g1_slope_, r_slope_,
       g1_slope_, bus_factor_ * g1_slope_, 0.0,
       r_slope_, 0.0, g2_slope_ + r_slope_;
  return -J;
}

AffineGame::AffineGame(Matrix A, Vector offset)
    : A_(std::move(A)), offset_(std::move(offset)) {
  if (A_.rows() != offset_.size() || A_.cols() != offset_.size())
    throw std::invalid_argument("affine game dimensions mismatch");
}

PayoffVector AffineGame::payoff(const SimplexState& x) const {
  return PayoffVector{offset_ + A_ * x.x};
}

Matrix AffineGame::jacobian(const SimplexState&) const { return A_; }

CallableGame::CallableGame(int n, std::function<Vector(const Vector&)> f)
    : n_(n), f_(std::move(f)) {}

PayoffVector CallableGame::payoff(const SimplexState& x) const {
  Vector p = f_(x.x);
  if (!p.allFinite()) throw std::runtime_error("non-finite payoff from game");
  return PayoffVector{p};
}

Matrix tangent_difference_matrix(int n) {
  Matrix W = Matrix::Zero(n - 1, n);
  for (int i = 0; i < n - 1; ++i) {
    W(i, i) = 1.0;
    W(i, i + 1) = -1.0;
  }
  return W;
}

namespace {

void enumerate_grid(int n, int slot, int remaining, int resolution,
                    Eigen::VectorXi& counts, std::vector<Vector>& out) {
  if (slot == n - 1) {
    counts(slot) = remaining;
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = double(counts(i)) / resolution;
    out.push_back(std::move(x));
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    counts(slot) = k;
    enumerate_grid(n, slot + 1, remaining - k, resolution, counts, out);
  }
}

}  // namespace

std::vector<Vector> simplex_grid(int n, int resolution) {
  std::vector<Vector> out;
  Eigen::VectorXi counts(n);
  enumerate_grid(n, 0, resolution, resolution, counts, out);
  return out;
}

ContractivityReport contractivity_check(const Game& game, int resolution) {
  const int n = game.dim();
  const Matrix W = tangent_difference_matrix(n);
  ContractivityReport report;
  report.resolution = resolution;
  double max_eig = -std::numeric_limits<double>::infinity();
  for (const Vector& x : simplex_grid(n, resolution)) {
    const Matrix DF = game.jacobian(SimplexState{x});
    const Matrix A = W * (DF.transpose() + DF) * W.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(A);
    max_eig = std::max(max_eig, solver.eigenvalues().maxCoeff());
  }
  report.max_eigenvalue = max_eig;
  report.contractive = max_eig <= 1e-10;

  if (const auto* cg = dynamic_cast<const AffineCongestionGame*>(&game)) {
    const double lhs = 4.0 * cg->r_slope() * (cg->g2_slope() + cg->g1_slope());
    const double rhs = std::pow((1.0 - cg->bus_factor()) * cg->g1_slope(), 2);
    report.slope_condition_holds = lhs >= rhs;
    report.uniform_slope_condition_holds =
        4.0 * cg->r_slope() >= cg->g1_slope();
  }
  return report;
}

double nash_gap(const Game& game, const SimplexState& x) {
  const Vector p = game.payoff(x).p;
  return p.maxCoeff() - p.dot(x.x);
}

namespace {

// Pairwise mass-transfer descent on the payoff gap with a shrinking step.
// The gap is a max of smooth pieces, so single transfers can jam on a ridge
// where two maximizers tie; compound two-transfer moves break those ridges
// before the step is halved.
NashPoint refine_gap(const Game& game, Vector x, double step, double tol_ne) {
  const int n = static_cast<int>(x.size());
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j != i) pairs.emplace_back(i, j);

  const auto moved = [&](const Vector& base, int i, int j, double d) {
    Vector trial = base;
    const double amount = std::min(d, trial(i));
    trial(i) -= amount;
    trial(j) += amount;
    return trial;
  };

  double gap = nash_gap(game, SimplexState{x});
  while (gap >= tol_ne && step > 1e-13) {
    bool improved = false;
    // Greedy single transfer.
    double best_gap = gap;
    Vector best_x;
    for (const auto& [i, j] : pairs) {
      if (x(i) <= 0.0) continue;
      Vector trial = moved(x, i, j, step);
      const double g = nash_gap(game, SimplexState{trial});
      if (g < best_gap) {
        best_gap = g;
        best_x = std::move(trial);
      }
    }
    if (best_gap < gap) {
      x = std::move(best_x);
      gap = best_gap;
      improved = true;
    } else {
      // Compound moves: two transfers applied together.
      for (const auto& [i, j] : pairs) {
        if (x(i) <= 0.0) continue;
        const Vector first = moved(x, i, j, step);
        for (const auto& [k, l] : pairs) {
          if (first(k) <= 0.0) continue;
          Vector trial = moved(first, k, l, step);
          const double g = nash_gap(game, SimplexState{trial});
          if (g < best_gap) {
            best_gap = g;
            best_x = std::move(trial);
          }
        }
      }
      if (best_gap < gap) {
        x = std::move(best_x);
        gap = best_gap;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  return NashPoint{SimplexState{x}, gap};
}

}  // namespace

NashSet nash_oracle(const Game& game, int resolution, double tol_ne) {
  const int n = game.dim();
  const auto grid = simplex_grid(n, resolution);

  // Coarse pass: keep grid points within one lattice cell of the best gap.
  std::vector<std::pair<double, Vector>> scored;
  scored.reserve(grid.size());
  for (const Vector& x : grid)
    scored.emplace_back(nash_gap(game, SimplexState{x}), x);
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  const double coarse_tol =
      std::max(10.0 * tol_ne, 4.0 * scored.front().first + 1e-9);
  std::vector<NashPoint> refined;
  for (const auto& [gap, x] : scored) {
    if (gap > coarse_tol && !refined.empty()) break;
    bool near_existing = false;
    for (const auto& kept : refined) {
      if ((kept.x.x - x).lpNorm<1>() < 4.0 / resolution) {
        near_existing = true;
        break;
      }
    }
    if (near_existing) continue;
    NashPoint pt = refine_gap(game, x, 1.0 / resolution, tol_ne);
    if (pt.gap < tol_ne) refined.push_back(std::move(pt));
  }

  // Merge refined points into clusters.
  NashSet out;
  out.tol = tol_ne;
  std::sort(refined.begin(), refined.end(),
            [](const NashPoint& a, const NashPoint& b) { return a.gap < b.gap; });
  for (auto& pt : refined) {
    bool merged = false;
    for (const auto& kept : out.equilibria) {
      if ((kept.x.x - pt.x.x).lpNorm<1>() < 1e-3) {
        merged = true;
        break;
      }
    }
    if (!merged) out.equilibria.push_back(std::move(pt));
  }
  return out;
}

std::vector<std::pair<Vector, Vector>> payoff_projection_field(
    const Game& game, const std::vector<Vector>& grid) {
  const int n = game.dim();
  std::vector<std::pair<Vector, Vector>> out;
  out.reserve(grid.size());
  for (const Vector& x : grid) {
    const Vector p = game.payoff(SimplexState{x}).p;
    const Vector projected = p.array() - p.mean();
    out.emplace_back(x, projected);
  }
  return out;
}

}  // namespace popdyn
