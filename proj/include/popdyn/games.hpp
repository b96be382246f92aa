#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "popdyn/simplex.hpp"

namespace popdyn {

/// Memoryless payoff mechanism F: X -> R^n. Implementations must be safe
/// for concurrent read-only evaluation. Payoff mechanisms with internal
/// state would slot in behind the same payoff() surface, but only the
/// memoryless case is supported.
class Game {
 public:
  virtual ~Game() = default;
  virtual int dim() const = 0;
  virtual PayoffVector payoff(const SimplexState& x) const = 0;

  /// Jacobian of the payoff map; defaults to central differences.
  virtual Matrix jacobian(const SimplexState& x) const;
};

/// Three-strategy weighted congestion game: drive the main road, ride the
/// bus on the main road, or drive the alternate road. Affine latencies
/// g1, g2, r plus a fixed walking cost; buses congest at reduced rate.
class AffineCongestionGame : public Game {
 public:
  AffineCongestionGame(double g1_slope, double g1_intercept, double g2_slope,
                       double g2_intercept, double r_slope, double r_intercept,
                       double walk_cost, double bus_factor);

  /// The parameterization used throughout: c = 35, g1 = 10z + 20,
  /// g2 = 30z + 15, r = 30z + 10, bus factor 1/20.
  static AffineCongestionGame standard();

  int dim() const override { return 3; }
  PayoffVector payoff(const SimplexState& x) const override;
  Matrix jacobian(const SimplexState& x) const override;

  double g1_slope() const { return g1_slope_; }
  double g2_slope() const { return g2_slope_; }
  double r_slope() const { return r_slope_; }
  double g1_intercept() const { return g1_intercept_; }
  double g2_intercept() const { return g2_intercept_; }
  double r_intercept() const { return r_intercept_; }
  double walk_cost() const { return walk_cost_; }
  double bus_factor() const { return bus_factor_; }

 private:
  double g1_slope_, g1_intercept_;
  double g2_slope_, g2_intercept_;
  double r_slope_, r_intercept_;
  double walk_cost_;
  double bus_factor_;
};

/// Affine game p = offset + A x, any dimension.
class AffineGame : public Game {
 public:
  AffineGame(Matrix A, Vector offset);
  int dim() const override { return static_cast<int>(offset_.size()); }
  PayoffVector payoff(const SimplexState& x) const override;
  Matrix jacobian(const SimplexState& x) const override;
  const Matrix& matrix() const { return A_; }
  const Vector& offset() const { return offset_; }

 private:
  Matrix A_;
  Vector offset_;
};

/// Game defined by an arbitrary callable; jacobian via finite differences.
class CallableGame : public Game {
 public:
  CallableGame(int n, std::function<Vector(const Vector&)> f);
  int dim() const override { return n_; }
  PayoffVector payoff(const SimplexState& x) const override;

 private:
  int n_;
  std::function<Vector(const Vector&)> f_;
};

struct ContractivityReport {
  int resolution = 0;
  double max_eigenvalue = 0.0;
  bool slope_condition_holds = false;      // 4 r' (g2' + g1') >= ((1-a) g1')^2
  bool uniform_slope_condition_holds = false;  // 4 r' >= g1'
  bool contractive = false;
};

/// Simplex-tangent difference matrix: rows e_i - e_{i+1}, (n-1) x n.
Matrix tangent_difference_matrix(int n);

/// Max eigenvalue of W (DF' + DF) W' over a barycentric grid of the given
/// resolution. For affine congestion games the slope conditions are also
/// evaluated directly.
ContractivityReport contractivity_check(const Game& game, int resolution = 100);

struct NashPoint {
  SimplexState x;
  double gap = 0.0;  // max(F(x)) - F(x)'x
};

struct NashSet {
  std::vector<NashPoint> equilibria;
  double tol = 0.0;
};

/// Payoff gap max(F(x)) - F(x)'x; zero exactly on Nash equilibria.
double nash_gap(const Game& game, const SimplexState& x);

/// Grid search over the simplex followed by pairwise-coordinate refinement
/// of the payoff gap; clusters within l1 distance 1e-3 are merged.
NashSet nash_oracle(const Game& game, int resolution = 50,
                    double tol_ne = 1e-6);

/// All barycentric lattice points {k/r} on the simplex.
std::vector<Vector> simplex_grid(int n, int resolution);

/// Payoff vectors projected onto the simplex tangent space,
/// (I - (1/n) 1 1') F(x), sampled at the given states.
std::vector<std::pair<Vector, Vector>> payoff_projection_field(
    const Game& game, const std::vector<Vector>& grid);

}  // namespace popdyn
