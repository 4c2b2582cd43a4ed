#pragma once

#include <vector>

#include "irlq/linalg.hpp"
#include "irlq/model.hpp"

namespace irlq {

struct ReducedSystem;

/// One matrix per grid node.
struct MatrixGridFunction {
  TimeGrid grid;
  std::vector<Mat> values;

  std::size_t size() const { return values.size(); }
  const Mat& operator[](std::size_t i) const { return values[i]; }
  const Mat& front() const { return values.front(); }
  const Mat& back() const { return values.back(); }

  /// Linear interpolation between bracketing nodes.
  Mat interpolate(double t) const;
};

/// Backward solution of a Riccati-type matrix ODE.
struct RiccatiSolution {
  MatrixGridFunction P;
  /// Right-hand side evaluated at each node; used for Hermite evaluation.
  std::vector<Mat> derivative;
  /// Max over interior nodes of ‖central difference − right-hand side‖_F.
  double residual_norm = 0.0;

  const TimeGrid& grid() const { return P.grid; }
  const Mat& operator[](std::size_t i) const { return P.values[i]; }

  /// Cubic Hermite interpolation from node values and node derivatives,
  /// fourth order accurate, so RK4 stages of downstream ODEs keep their order.
  Mat at(double t) const;
};

/// 0 = Ṗ + AᵀP + PA + Q − Γ0ᵀΥ0†Γ0 with Υ0 = R, Γ0 = BᵀP, P(T) = H.
/// Classical RK4 marching backward, the pseudoinverse re-evaluated at every
/// stage, P symmetrized after each step. Throws DivergenceError.
RiccatiSolution integrate_regular_riccati(const LQProblem& p, double rank_tol = kDefaultRankTol);

/// 0 = Ṗ1 + P1A0 + A0ᵀP1 + P1D0P1 with P1(T) = p1_terminal. The layer-two
/// correction term −Γ1ᵀΥ1†Γ1 vanishes identically because Υ1 = 0.
RiccatiSolution integrate_p1(const ReducedSystem& reduced, const Mat& p1_terminal);

/// s ↦ P2(t_ref, s) on every node, where ∂P2(t, s)/∂t = −A0ᵀ(t) P2(t, s),
/// P2(t, t) = I. Built from one fundamental matrix Ψ (Ψ̇ = −A0ᵀΨ, Ψ(t0) = I)
/// as Ψ(t_ref) Ψ(s)⁻¹. t_ref must be a grid node.
MatrixGridFunction transition_family(const ReducedSystem& reduced, double t_ref);

/// Composite Simpson over the uniform grid; an odd interval count closes
/// with Simpson's 3/8 rule on the last three cells, a single interval uses
/// the trapezoid rule.
Mat quadrature(const MatrixGridFunction& values);

/// Scalar convenience for cost integrands.
double quadrature(const TimeGrid& grid, const std::vector<double>& values);

}  // namespace irlq
