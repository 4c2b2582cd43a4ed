// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "irlq/errors.hpp"
#include "irlq/oracle.hpp"
#include "irlq/pipeline.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace irlq;
using namespace irlq::testing;

namespace {

// Closed form of the E2 Riccati solution at t = 0.
constexpr double kE2RiccatiAtStart = 1.0944859497480877;

struct Check {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what, double value) {
    if (!ok) pass = false;
    detail << ' ' << what << '=' << format_number(value) << (ok ? "" : "(!)");
  }
};

struct Layers {
  LQProblem problem;
  RiccatiSolution P;
  ReducedSystem reduced;
  LayerTwoSolution l2;
};

Layers layers(const LQProblem& p) {
  Layers out{p, integrate_regular_riccati(p), {}, {}};
  out.reduced = reduce(p, out.P);
  const auto terminal = select_p1_terminal(out.reduced);
  if (!terminal) throw NumericalError("no terminal P1");
  out.l2 = check_solvability(out.reduced, integrate_p1(out.reduced, *terminal));
  return out;
}

// Component of an m-vector of inputs along E1's singular input, i.e. the
// reduced quantity expressed in the basis where G0 = e2.
double singular_component(const Mat& g0, const Mat& reduced) { return (g0 * reduced)(1, 0); }

int cli_status(const std::string& args) {
  const std::string cmd = std::string(IRLQ_CLI) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

void ac1(Check& v) {
  const LQProblem e1 = fixture("E1");
  const RiccatiSolution P = integrate_regular_riccati(e1);
  double worst = 0.0;
  for (std::size_t k = 0; k < e1.grid.size(); ++k)
    worst = std::max(worst, std::abs(P[k](0, 0) + 1.0 / (e1.grid.node(k) - 2.0)));
  v.require(worst <= 1e-8, "E1_max_err", worst);
  const RiccatiSolution P2 = integrate_regular_riccati(fixture("E2"));
  const double err = std::abs(P2[0](0, 0) - kE2RiccatiAtStart);
  v.require(err <= 1e-7, "E2_P0_err", err);
  v.detail << " E2_P0=" << format_number(P2[0](0, 0));
}

void ac2(Check& v) {
  const Layers e1 = layers(fixture("E1"));
  v.require(std::abs(e1.l2.p1_terminal(0, 0) + 1.0) <= 1e-12, "P1_T", e1.l2.p1_terminal(0, 0));
  double worst = 0.0;
  for (std::size_t k = 0; k < e1.problem.grid.size(); ++k)
    worst = std::max(worst, std::abs(e1.l2.p1[k](0, 0) - 1.0 / (e1.problem.grid.node(k) - 2.0)));
  v.require(worst <= 1e-8, "P1_max_err", worst);
  v.require(e1.l2.gamma1_max <= 1e-8, "gamma1_max", e1.l2.gamma1_max);
}

void ac3(Check& v) {
  const Layers e2 = layers(fixture("E2"));
  v.require(std::abs(e2.l2.p1_terminal(0, 0) + 2.0) <= 1e-12, "P1_T", e2.l2.p1_terminal(0, 0));
  v.require(!e2.l2.solvable, "solvable", e2.l2.solvable ? 1.0 : 0.0);
  const double g0 = e2.l2.gamma1_norms.front();
  v.require(std::abs(g0 - 0.761594) <= 1e-4, "gamma1_at_0", g0);
  const fs::path dir = fs::temp_directory_path() / "irlq_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const bool wrote = cli_status("fixture E2 --out " + dir.string()) == 0;
  const int status = wrote ? cli_status("solve " + (dir / "E2.json").string() + " --out " + (dir / "out").string())
                           : -1;
  v.require(status == 3, "cli_exit", status);
  fs::remove_all(dir);
}

void ac4(Check& v) {
  const Layers e1 = layers(fixture("E1"));
  const OpenLoopOutcome out = open_loop(e1.problem, e1.reduced, e1.l2);
  if (!std::holds_alternative<Controller>(out)) {
    v.require(false, "open_loop_solvable", 0.0);
    return;
  }
  const Controller& c = std::get<Controller>(out);
  v.require(std::abs(c.gramian(0, 0) - 0.25) <= 1e-8, "G1", c.gramian(0, 0));
  v.require(std::abs(c.zeta(0) + 2.0) <= 1e-7, "zeta", c.zeta(0));
  double worst = 0.0;
  for (std::size_t k = 0; k < e1.problem.grid.size(); ++k)
    worst = std::max(worst, std::abs(singular_component(e1.reduced.g0[k], c.u1_profile[k]) + 1.0));
  v.require(worst <= 1e-6, "u1_max_err", worst);
  const Trajectory traj = simulate(e1.problem, c);
  v.require(std::abs(traj.x.back()(0)) <= 1e-6, "x_T", traj.x.back()(0));
  v.require(traj.cost <= 1e-10, "cost", traj.cost);
}

void ac5(Check& v) {
  const Layers e1 = layers(fixture("E1"));
  const ClosedLoopOutcome out = closed_loop_nonsingular(e1.reduced, e1.l2);
  if (!std::holds_alternative<Controller>(out)) {
    v.require(false, "closed_loop", 0.0);
    return;
  }
  const Controller& c = std::get<Controller>(out);
  double worst = 0.0;
  for (std::size_t k = 1; k < c.k1.size(); ++k)
    worst = std::max(worst, std::abs(singular_component(e1.reduced.g0[k], c.k1[k]) -
                                     1.0 / (e1.problem.grid.node(k) - 1.0)));
  v.require(worst <= 1e-6, "K1_max_err", worst);
  const Trajectory traj = simulate(e1.problem, c);
  double x_err = 0.0;
  for (std::size_t k = 0; k < traj.grid.size(); ++k)
    x_err = std::max(x_err, std::abs(traj.x[k](0) - (1.0 - traj.grid.node(k))));
  v.require(x_err <= 1e-6, "x_max_err", x_err);
  v.require(traj.terminal_violation <= 1e-6, "terminal_violation", traj.terminal_violation);
}

void ac6(Check& v) {
  const LQProblem p = regular_scalar();
  const SolveReport r = [&] {
    SolveOptions o;
    o.oracle_steps.clear();
    return solve(p, o);
  }();
  const RiccatiSolution& P = *r.riccati;
  const double continuous = P[0](0, 0);  // J* = x0ᵀP(0)x0 with x0 = 1
  v.require(std::abs(continuous - std::tanh(1.0)) <= 1e-6, "P0_err", std::abs(continuous - std::tanh(1.0)));
  const OracleResult o = solve_discrete(discretize(p, 2000), p.x0);
  const double gap = std::abs(o.optimal_cost - continuous);
  v.require(gap <= 1e-3, "N2000_gap", gap);
}

void ac7(Check& v) {
  const LQProblem e1 = fixture("E1");
  const OracleResult o = solve_discrete(discretize(e1, 100), e1.x0);
  v.require(o.optimal_cost <= 1e-10, "N100_cost", o.optimal_cost);
  SolveOptions opts;
  opts.oracle_steps = {100};
  const SolveReport r = solve(e1, opts);
  const double continuous = r.cost.value_or(std::nan(""));
  v.require(std::abs(continuous - o.optimal_cost) <= 1e-10, "continuous_gap", std::abs(continuous - o.optimal_cost));
}

void ac8(Check& v) {
  for (SolveMode mode : {SolveMode::Open, SolveMode::Closed}) {
    SolveOptions o;
    o.mode = mode;
    o.oracle_steps.clear();
    const SolveReport r = solve(fixture("E1"), o);
    const std::string tag(to_string(mode));
    if (!r.residuals) {
      v.require(false, tag + "_residuals", 0.0);
      continue;
    }
    v.require(r.residuals->max() <= 1e-4, tag + "_max", r.residuals->max());
    v.require(r.residuals->equilibrium <= 1e-6, tag + "_equilibrium", r.residuals->equilibrium);
  }
}

void ac9(Check& v) {
  auto suite = [&](const std::string& name, const PropertyOutcome& out, double tol) {
    v.require(out.cases >= 100 && out.worst <= tol, name, out.worst);
  };
  suite("penrose", penrose_property(), 1e-10);
  suite("projector", projector_reconstruction_property(), 1e-10);
  suite("riccati_symmetry", riccati_symmetry_property(), 1e-10);
  suite("combined_riccati", combined_riccati_property(), 1e-6);
  suite("cost_scaling", cost_scaling_property(), 1e-8);
  suite("regular_theta", regular_theta_property(), 0.0);
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Check&)>> criteria[] = {
      {"AC1 regular Riccati fidelity", ac1},  {"AC2 layer-two fidelity", ac2},
      {"AC3 unsolvability detection", ac3},   {"AC4 open-loop synthesis", ac4},
      {"AC5 closed-loop synthesis", ac5},     {"AC6 oracle agreement (regular)", ac6},
      {"AC7 oracle agreement (irregular)", ac7}, {"AC8 forward/backward audit", ac8},
      {"AC9 property suites", ac9},
  };
  bool all = true;
  for (const auto& [name, check] : criteria) {
    Check v;
    const auto start = std::chrono::steady_clock::now();
    try {
      check(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " exception: " << e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char elapsed[32];
    std::snprintf(elapsed, sizeof elapsed, " (%.2f s)", seconds);
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ':' << v.detail.str() << elapsed << '\n';
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
