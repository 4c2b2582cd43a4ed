#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "irlq/oracle.hpp"
#include "irlq/reduce.hpp"
#include "irlq/sim.hpp"
#include "irlq/synth.hpp"

namespace irlq {

enum class SolveMode { Open, Closed, Auto };

SolveMode parse_mode(const std::string& s);
std::string_view to_string(SolveMode mode);

struct Tolerances {
  double rank = kDefaultRankTol;
  double gamma = kDefaultGammaTol;
  double range = kDefaultRangeTol;
  double solve = kDefaultSolveTol;
  double optimality = kDefaultOptimalityTol;
};

struct SolveOptions {
  SolveMode mode = SolveMode::Auto;
  Tolerances tol;
  std::optional<Mat> p1_terminal;   // overrides the minimal-norm choice
  std::vector<int> oracle_steps{50, 100, 200};
};

enum class ExitCode : int { Ok = 0, InputError = 2, Unsolvable = 3, NumericalFailure = 4 };

struct PathAttempt {
  std::string path;     // "closed-nonsingular", "closed-singular", "open"
  std::string outcome;  // "ok" or the reason it was rejected
};

struct SolveReport {
  Verdict verdict = Verdict::Regular;
  Eigen::Index m0 = 0;
  bool solvable = false;
  std::optional<bool> open_loop_solvable;
  std::optional<ControllerKind> controller;
  std::string controller_path;
  std::vector<PathAttempt> attempts;
  std::optional<double> cost;
  double gamma1_max = 0.0;
  std::optional<double> terminal_violation;
  std::optional<ResidualReport> residuals;
  std::optional<ComparisonReport> oracle;
  std::string failure;  // why no controller was produced, if any
  ExitCode exit_code = ExitCode::Ok;
  Tolerances tolerances;

  // Intermediate results, kept for callers that want to inspect them.
  std::optional<RiccatiSolution> riccati;
  std::optional<LayerTwoSolution> layer_two;
  std::optional<Controller> synthesized;
  std::optional<Trajectory> trajectory;

  /// "Irregular, solvable, open-loop solvable" and similar.
  std::string summary() const;
};

/// classify → reduce → layer two → synthesize → simulate → audit → oracle.
/// Verdicts are returned in the report; exceptions (InputError,
/// NumericalError) propagate.
SolveReport solve(const LQProblem& p, const SolveOptions& options = {});

std::string render_text(const SolveReport& r);
nlohmann::json render_json(const SolveReport& r);

/// "%.17g".
std::string format_number(double v);

}  // namespace irlq
