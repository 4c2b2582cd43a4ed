#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "irlq/integrate.hpp"
#include "irlq/synth.hpp"

namespace irlq {

struct Trajectory {
  TimeGrid grid;
  std::vector<Vec> x;
  std::vector<Vec> u;
  std::vector<Vec> theta;    // Θ = P1 x (irregular) or 0
  std::vector<Vec> costate;  // p = P x + Θ
  double cost = 0.0;
  double terminal_violation = 0.0;  // ‖P1(T) x(T)‖
};

/// Max norms over the grid. Differential residuals use central differences
/// on interior nodes, so they carry O(h²) discretization error.
struct ResidualReport {
  double state = 0.0;         // ẋ − Ax − Bu
  double costate = 0.0;       // ṗ + Aᵀp + Qx
  double equilibrium = 0.0;   // Ru + Bᵀp
  double algebraic = 0.0;     // C0x + B0ᵀΘ
  double theta = 0.0;         // Θ̇ + A0ᵀΘ + C0ᵀu1
  double terminal_violation = 0.0;

  double max() const;
};

/// RK4 on ẋ = Ax + Bu with u from the control law at stage times. A law
/// with a 1/(t − T) part is never evaluated at T: the last cell takes one
/// explicit step from T − h and projects onto ker P1(T), which is where the
/// exact solution y1 ∝ (T − t) of the singular directions lands.
Trajectory simulate(const LQProblem& p, const Controller& controller);

/// Residuals of the forward/backward system along a simulated trajectory.
/// Without a layer-two solution the problem is treated as regular: Θ ≡ 0
/// and the algebraic, theta and terminal entries are zero.
ResidualReport audit_fbde(const LQProblem& p, const Trajectory& traj, const RiccatiSolution& P,
                          const std::optional<LayerTwoSolution>& l2,
                          double rank_tol = kDefaultRankTol);

/// Header t,x_1..x_n,u_1..u_m,theta_1..theta_n,p_1..p_n; 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace irlq
