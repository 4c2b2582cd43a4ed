#include "irlq/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "irlq/errors.hpp"
#include "irlq/reduce.hpp"

namespace irlq {

double ResidualReport::max() const {
  return std::max({state, costate, equilibrium, algebraic, theta, terminal_violation});
}

Trajectory simulate(const LQProblem& p, const Controller& controller) {
  require_valid(p);
  const ControlLaw& law = controller.law;
  if (!(law.grid == p.grid) || law.feedback.size() != p.grid.size())
    throw InputError("simulate: controller was synthesized on a different grid");
  if (controller.riccati.size() != p.grid.size() || controller.theta_gain.size() != p.grid.size())
    throw InputError("simulate: controller data does not cover the grid");
  if (law.feedback.front().rows() != p.m || law.feedback.front().cols() != p.n)
    throw InputError("simulate: controller dimensions do not match the problem");

  const TimeGrid& grid = p.grid;
  const std::size_t last = grid.size() - 1;
  const double h = grid.step();
  auto rhs = [&](double t, const Vec& x) -> Vec { return p.a(t) * x + p.b(t) * law(t, x); };

  Trajectory out;
  out.grid = grid;
  out.x.resize(grid.size());
  out.u.resize(grid.size());
  out.x[0] = p.x0;
  const std::size_t rk4_cells = law.singular() ? last - 1 : last;
  for (std::size_t k = 0; k < rk4_cells; ++k) {
    const double t = grid.node(k);
    const Vec& x = out.x[k];
    const Vec k1 = rhs(t, x);
    const Vec k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
    const Vec k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
    const Vec k4 = rhs(grid.node(k + 1), x + h * k3);
    Vec next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!all_finite(next)) throw DivergenceError(k + 1, grid.node(k + 1), "closed-loop state");
    out.x[k + 1] = std::move(next);
  }
  const std::size_t u_nodes = law.singular() ? last : grid.size();
  for (std::size_t k = 0; k < u_nodes; ++k) out.u[k] = law(grid.node(k), out.x[k]);

  if (law.singular()) {
    const double t = grid.node(last - 1);
    const Vec& x = out.x[last - 1];
    const Vec slope = p.a(t) * x + p.b(t) * out.u[last - 1];
    out.x[last] = law.terminal_projector * (x + h * slope);
    out.u[last] = last >= 2 ? Vec(2.0 * out.u[last - 1] - out.u[last - 2]) : out.u[last - 1];
  }

  out.theta.resize(grid.size());
  out.costate.resize(grid.size());
  std::vector<double> integrand(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.node(k);
    const Vec& x = out.x[k];
    const Vec& u = out.u[k];
    out.theta[k] = controller.theta_gain[k] * x;
    out.costate[k] = controller.riccati[k] * x + out.theta[k];
    integrand[k] = x.dot(p.q(t) * x) + u.dot(p.r(t) * u);
  }
  const Vec& xt = out.x.back();
  out.cost = quadrature(grid, integrand) + xt.dot(p.H * xt);
  if (controller.p1_terminal.size() > 0) out.terminal_violation = (controller.p1_terminal * xt).norm();
  if (!std::isfinite(out.cost)) throw DivergenceError(last, grid.t_final(), "cost");
  return out;
}

ResidualReport audit_fbde(const LQProblem& p, const Trajectory& traj, const RiccatiSolution& P,
                          const std::optional<LayerTwoSolution>& l2, double rank_tol) {
  const TimeGrid& grid = traj.grid;
  if (!(grid == p.grid) || traj.x.size() != grid.size() || P.P.size() != grid.size())
    throw InputError("audit_fbde: trajectory, problem and Riccati grids differ");
  if (l2 && l2->p1.P.size() != grid.size())
    throw InputError("audit_fbde: layer-two solution does not cover the grid");

  const std::size_t nodes = grid.size();
  const double h = grid.step();
  std::vector<Vec> theta(nodes), costate(nodes), u1_drive(nodes);
  std::vector<Mat> a0t(nodes);
  ResidualReport out;
  for (std::size_t k = 0; k < nodes; ++k) {
    const double t = grid.node(k);
    const Vec& x = traj.x[k];
    const Vec& u = traj.u[k];
    theta[k] = l2 ? Vec(l2->p1[k] * x) : Vec::Zero(p.n);
    costate[k] = P[k] * x + theta[k];
    const Mat b = p.b(t);
    out.equilibrium = std::max(out.equilibrium, (p.r(t) * u + b.transpose() * costate[k]).norm());
    if (!l2) continue;

    const ReducedNode node = reduce_node(p.a(t), b, p.r(t), P[k], rank_tol);
    out.algebraic = std::max(out.algebraic, (node.c0 * x + node.b0.transpose() * theta[k]).norm());
    // u = −Υ0†(Γ0x + BᵀΘ) + G0u1 and G0ᵀΥ0† = 0.
    const Vec u1 = node.g0.transpose() * (u + node.upsilon0_pinv * (node.gamma0 * x + b.transpose() * theta[k]));
    u1_drive[k] = node.c0.transpose() * u1;
    a0t[k] = node.a0.transpose();
  }

  for (std::size_t k = 1; k + 1 < nodes; ++k) {
    const double t = grid.node(k);
    const Vec& x = traj.x[k];
    const Mat a = p.a(t);
    const Vec dx = (traj.x[k + 1] - traj.x[k - 1]) / (2.0 * h);
    out.state = std::max(out.state, (dx - a * x - p.b(t) * traj.u[k]).norm());
    const Vec dp = (costate[k + 1] - costate[k - 1]) / (2.0 * h);
    out.costate = std::max(out.costate, (dp + a.transpose() * costate[k] + p.q(t) * x).norm());
    if (!l2) continue;
    const Vec dtheta = (theta[k + 1] - theta[k - 1]) / (2.0 * h);
    out.theta = std::max(out.theta, (dtheta + a0t[k] * theta[k] + u1_drive[k]).norm());
  }
  if (l2) out.terminal_violation = (l2->p1.P.back() * traj.x.back()).norm();
  return out;
}

namespace {

void put(std::ofstream& f, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  f << buf;
}

void header(std::ofstream& f, const char* name, Eigen::Index count) {
  for (Eigen::Index i = 1; i <= count; ++i) f << ',' << name << '_' << i;
}

void row(std::ofstream& f, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    f << ',';
    put(f, v(i));
  }
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  const Eigen::Index n = traj.x.front().size();
  const Eigen::Index m = traj.u.front().size();
  f << 't';
  header(f, "x", n);
  header(f, "u", m);
  header(f, "theta", n);
  header(f, "p", n);
  f << '\n';
  for (std::size_t k = 0; k < traj.grid.size(); ++k) {
    put(f, traj.grid.node(k));
    row(f, traj.x[k]);
    row(f, traj.u[k]);
    row(f, traj.theta[k]);
    row(f, traj.costate[k]);
    f << '\n';
  }
  if (!f) throw InputError("failed writing " + path.string());
}

}  // namespace irlq
