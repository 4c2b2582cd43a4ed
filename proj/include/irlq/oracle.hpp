#pragma once

#include <vector>

#include "irlq/model.hpp"
#include "irlq/sim.hpp"

namespace irlq {

inline constexpr double kDefaultOptimalityTol = 1e-4;

/// Zero-order-hold transcription: x_{k+1} = Φ_k x_k + Γ_k u_k and
/// J = Σ [x_k; u_k]ᵀ W_k [x_k; u_k] + x_Nᵀ H x_N.
struct DiscreteLQ {
  int N = 0;
  int n = 0;
  int m = 0;
  std::vector<Mat> phi;
  std::vector<Mat> gamma;
  std::vector<Mat> stage_cost;  // (n + m) × (n + m)
  Mat H;
};

struct OracleResult {
  double optimal_cost = 0.0;
  std::vector<Vec> optimal_controls;
  double hessian_min_eigenvalue = 0.0;
  bool attained = false;
};

/// Φ_k, Γ_k and W_k from RK4/Simpson sub-steps inside every cell
/// (2·⌈500/N⌉ of them, at least two). Throws InputError for N < 2.
DiscreteLQ discretize(const LQProblem& p, int N);

/// Minimal-norm minimizer U* = −ℋ†g of the stacked quadratic. Throws
/// InputError when a stage-cost matrix is indefinite beyond round-off.
OracleResult solve_discrete(const DiscreteLQ& d, const Vec& x0);

struct OracleRung {
  int N = 0;
  double discrete_cost = 0.0;
  double gap = 0.0;            // |J_continuous − J_discrete|
  bool below_continuous = false;  // J_discrete ≤ J_continuous + tol
  bool attained = false;
  double hessian_min_eigenvalue = 0.0;
};

struct ComparisonReport {
  double continuous_cost = 0.0;
  double tol = kDefaultOptimalityTol;
  std::vector<OracleRung> rungs;
  /// Gaps non-increasing along the ladder within 1e-6.
  bool monotone = true;
};

ComparisonReport compare(const LQProblem& p, const Trajectory& traj, const std::vector<int>& ladder,
                         double tol_opt = kDefaultOptimalityTol);

/// Oracle ladder against an explicit reference cost (used when no
/// trajectory exists, e.g. for unsolvable problems).
ComparisonReport compare(const LQProblem& p, double continuous_cost,
                         const std::vector<int>& ladder, double tol_opt = kDefaultOptimalityTol);

}  // namespace irlq
