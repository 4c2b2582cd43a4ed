#include "irlq/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "irlq/errors.hpp"

namespace irlq {

SolveMode parse_mode(const std::string& s) {
  if (s == "open") return SolveMode::Open;
  if (s == "closed") return SolveMode::Closed;
  if (s == "auto") return SolveMode::Auto;
  throw InputError("unknown mode '" + s + "' (expected open, closed or auto)");
}

std::string_view to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::Open:
      return "open";
    case SolveMode::Closed:
      return "closed";
    case SolveMode::Auto:
      return "auto";
  }
  return "?";
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string SolveReport::summary() const {
  std::string s(to_string(verdict));
  if (verdict == Verdict::Regular) return s + ", solvable";
  if (!solvable) return s + ", unsolvable";
  s += ", solvable";
  if (open_loop_solvable) s += *open_loop_solvable ? ", open-loop solvable" : ", not open-loop solvable";
  return s;
}

namespace {

struct Synthesis {
  std::optional<Controller> controller;
  bool unsupported = false;
};

bool p1_invertible_before_terminal(const LayerTwoSolution& l2, double rank_tol) {
  const Eigen::Index n = l2.p1_terminal.rows();
  for (std::size_t k = 0; k + 1 < l2.p1.P.size(); ++k)
    if (pinv(l2.p1[k], rank_tol).rank != n) return false;
  return true;
}

Synthesis try_closed_loop(const ReducedSystem& reduced, const LayerTwoSolution& l2,
                          const Tolerances& tol, SolveReport& report) {
  const bool nonsingular = p1_invertible_before_terminal(l2, tol.rank);
  const std::string path = nonsingular ? "closed-nonsingular" : "closed-singular";
  const ClosedLoopOutcome outcome =
      nonsingular ? closed_loop_nonsingular(reduced, l2, tol.solve, tol.rank)
                  : closed_loop_singular(reduced, l2, tol.solve, tol.rank);
  Synthesis out;
  if (const auto* c = std::get_if<Controller>(&outcome)) {
    report.attempts.push_back({path, "ok"});
    out.controller = *c;
  } else if (const auto* g = std::get_if<NoGain>(&outcome)) {
    report.attempts.push_back({path, "no gain at node " + std::to_string(g->node) + " (t = " +
                                         format_number(g->time) + "): " + g->reason});
  } else {
    report.attempts.push_back({path, "unsupported: " + std::get<Unsupported>(outcome).reason});
    out.unsupported = true;
  }
  return out;
}

void finish_with_controller(const LQProblem& p, const Controller& c,
                            const std::optional<LayerTwoSolution>& l2, const SolveOptions& o,
                            SolveReport& r) {
  r.controller = c.kind;
  r.controller_path = c.closed_loop_path;
  r.synthesized = c;
  Trajectory traj = simulate(p, c);
  r.cost = traj.cost;
  r.terminal_violation = traj.terminal_violation;
  r.residuals = audit_fbde(p, traj, *r.riccati, l2, o.tol.rank);
  if (!o.oracle_steps.empty()) r.oracle = compare(p, traj, o.oracle_steps, o.tol.optimality);
  r.trajectory = std::move(traj);
}

}  // namespace

SolveReport solve(const LQProblem& p, const SolveOptions& o) {
  require_valid(p);
  SolveReport r;
  r.tolerances = o.tol;
  r.riccati = integrate_regular_riccati(p, o.tol.rank);
  const Classification cls = classify(p, *r.riccati, o.tol.range, o.tol.rank);
  r.verdict = cls.verdict;
  r.m0 = cls.m0;

  if (cls.verdict == Verdict::Regular) {
    r.solvable = true;
    r.open_loop_solvable = true;
    r.attempts.push_back({"regular", "ok"});
    finish_with_controller(p, solve_regular(p, *r.riccati, cls, o.tol.rank), std::nullopt, o, r);
    return r;
  }

  const ReducedSystem reduced = reduce(p, *r.riccati, o.tol.rank);
  std::optional<Mat> terminal = o.p1_terminal;
  if (terminal) {
    if (terminal->rows() != p.n || terminal->cols() != p.n)
      throw InputError("P1 terminal override must be " + std::to_string(p.n) + " x " +
                       std::to_string(p.n));
  } else {
    terminal = select_p1_terminal(reduced, o.tol.solve, o.tol.rank);
  }
  if (!terminal) {
    r.solvable = false;
    r.failure = "no symmetric P1(T) satisfies B0ᵀ(T) P1(T) = −C0(T)";
    r.exit_code = ExitCode::Unsolvable;
    if (!o.oracle_steps.empty())
      r.oracle = compare(p, std::numeric_limits<double>::quiet_NaN(), o.oracle_steps, o.tol.optimality);
    return r;
  }

  const RiccatiSolution p1 = integrate_p1(reduced, *terminal);
  r.layer_two = check_solvability(reduced, p1, o.tol.gamma);
  const LayerTwoSolution& l2 = *r.layer_two;
  r.gamma1_max = l2.gamma1_max;
  r.solvable = l2.solvable;
  if (!l2.solvable) {
    r.failure = "Γ1 = C0 + B0ᵀP1 does not vanish (max norm " + format_number(l2.gamma1_max) + ")";
    r.exit_code = ExitCode::Unsolvable;
    if (!o.oracle_steps.empty())
      r.oracle = compare(p, std::numeric_limits<double>::quiet_NaN(), o.oracle_steps, o.tol.optimality);
    return r;
  }

  // The Gramian test is always run so the report can state open-loop solvability.
  const OpenLoopOutcome open = open_loop(p, reduced, l2, o.tol.range, o.tol.rank);
  const Controller* open_controller = std::get_if<Controller>(&open);
  r.open_loop_solvable = open_controller != nullptr;
  const std::string open_outcome =
      open_controller ? "ok"
                      : "Range(P1(t0)) not in Range(G1), gap " +
                            format_number(std::get<NotOpenLoopSolvable>(open).range_gap);

  std::optional<Controller> chosen;
  bool unsupported = false;
  if (o.mode != SolveMode::Open) {
    Synthesis closed = try_closed_loop(reduced, l2, o.tol, r);
    chosen = std::move(closed.controller);
    unsupported = closed.unsupported;
  }
  if (!chosen && o.mode != SolveMode::Closed) {
    r.attempts.push_back({"open", open_outcome});
    if (open_controller) chosen = *open_controller;
  }

  if (!chosen) {
    r.failure = "no controller synthesized in mode " + std::string(to_string(o.mode));
    r.exit_code = unsupported && o.mode == SolveMode::Closed ? ExitCode::NumericalFailure
                                                             : ExitCode::Unsolvable;
    return r;
  }
  finish_with_controller(p, *chosen, l2, o, r);
  return r;
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : "n/a"; }

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json number_json(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

std::string render_text(const SolveReport& r) {
  std::ostringstream s;
  s << r.summary() << '\n';
  s << "classification: " << to_string(r.verdict) << '\n';
  s << "m0: " << r.m0 << '\n';
  s << "solvable: " << (r.solvable ? "true" : "false") << '\n';
  s << "open_loop_solvable: "
    << (r.open_loop_solvable ? (*r.open_loop_solvable ? "true" : "false") : "n/a") << '\n';
  s << "controller: " << (r.controller ? std::string(to_string(*r.controller)) : "none");
  if (!r.controller_path.empty()) s << " (" << r.controller_path << ')';
  s << '\n';
  for (const PathAttempt& a : r.attempts) s << "  path " << a.path << ": " << a.outcome << '\n';
  if (!r.failure.empty()) s << "failure: " << r.failure << '\n';
  s << "cost: " << opt_number(r.cost) << '\n';
  s << "gamma1_max: " << format_number(r.gamma1_max) << '\n';
  s << "terminal_violation: " << opt_number(r.terminal_violation) << '\n';
  if (r.residuals) {
    const ResidualReport& res = *r.residuals;
    s << "residuals:\n";
    s << "  state: " << format_number(res.state) << '\n';
    s << "  costate: " << format_number(res.costate) << '\n';
    s << "  equilibrium: " << format_number(res.equilibrium) << '\n';
    s << "  algebraic: " << format_number(res.algebraic) << '\n';
    s << "  theta: " << format_number(res.theta) << '\n';
    s << "  terminal_violation: " << format_number(res.terminal_violation) << '\n';
  }
  if (r.oracle) {
    const ComparisonReport& c = *r.oracle;
    s << "oracle (reference cost " << format_number(c.continuous_cost) << ", tol "
      << format_number(c.tol) << ", monotone " << (c.monotone ? "true" : "false") << "):\n";
    s << "  N discrete_cost gap below_continuous attained hessian_min_eigenvalue\n";
    for (const OracleRung& g : c.rungs)
      s << "  " << g.N << ' ' << format_number(g.discrete_cost) << ' ' << format_number(g.gap)
        << ' ' << (g.below_continuous ? "true" : "false") << ' '
        << (g.attained ? "true" : "false") << ' ' << format_number(g.hessian_min_eigenvalue)
        << '\n';
  }
  s << "tolerances: rank " << format_number(r.tolerances.rank) << ", gamma "
    << format_number(r.tolerances.gamma) << ", range " << format_number(r.tolerances.range)
    << ", solve " << format_number(r.tolerances.solve) << ", optimality "
    << format_number(r.tolerances.optimality) << '\n';
  return s.str();
}

nlohmann::json render_json(const SolveReport& r) {
  using nlohmann::json;
  json j;
  j["classification"] = std::string(to_string(r.verdict));
  j["m0"] = r.m0;
  j["solvable"] = r.solvable;
  j["open_loop_solvable"] = r.open_loop_solvable ? json(*r.open_loop_solvable) : json(nullptr);
  json controller;
  controller["kind"] = r.controller ? json(std::string(to_string(*r.controller))) : json(nullptr);
  controller["path"] = r.controller_path;
  controller["attempts"] = json::array();
  for (const PathAttempt& a : r.attempts)
    controller["attempts"].push_back({{"path", a.path}, {"outcome", a.outcome}});
  controller["failure"] = r.failure;
  j["controller"] = controller;
  j["summary"] = r.summary();
  j["cost"] = opt_json(r.cost);
  j["gamma1_max"] = r.gamma1_max;
  j["terminal_violation"] = opt_json(r.terminal_violation);
  if (r.residuals) {
    const ResidualReport& res = *r.residuals;
    j["residuals"] = {{"state", res.state},
                      {"costate", res.costate},
                      {"equilibrium", res.equilibrium},
                      {"algebraic", res.algebraic},
                      {"theta", res.theta},
                      {"terminal_violation", res.terminal_violation}};
  } else {
    j["residuals"] = nullptr;
  }
  if (r.oracle) {
    const ComparisonReport& c = *r.oracle;
    json rungs = json::array();
    for (const OracleRung& g : c.rungs)
      rungs.push_back({{"N", g.N},
                       {"discrete_cost", number_json(g.discrete_cost)},
                       {"gap", number_json(g.gap)},
                       {"below_continuous", g.below_continuous},
                       {"attained", g.attained},
                       {"hessian_min_eigenvalue", number_json(g.hessian_min_eigenvalue)}});
    j["oracle"] = {{"reference_cost", number_json(c.continuous_cost)},
                   {"tol", c.tol},
                   {"monotone", c.monotone},
                   {"rungs", rungs}};
  } else {
    j["oracle"] = nullptr;
  }
  j["tolerances"] = {{"rank", r.tolerances.rank},
                     {"gamma", r.tolerances.gamma},
                     {"range", r.tolerances.range},
                     {"solve", r.tolerances.solve},
                     {"optimality", r.tolerances.optimality}};
  j["exit_code"] = static_cast<int>(r.exit_code);
  return j;
}

}  // namespace irlq
