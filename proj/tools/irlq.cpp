// Command-line front end: classify, solve, oracle ladder, fixture export.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "irlq/errors.hpp"
#include "irlq/pipeline.hpp"
#include "irlq/problem_io.hpp"

namespace fs = std::filesystem;
using namespace irlq;

namespace {

struct Common {
  std::string file;
  std::optional<int> grid;
  double tol_rank = kDefaultRankTol;
  double tol_gamma = kDefaultGammaTol;
  double tol_range = kDefaultRangeTol;
};

LQProblem load(const Common& c) {
  LQProblem p = load_problem(c.file);
  if (c.grid) p.grid = TimeGrid(p.grid.t0(), p.grid.t_final(), *c.grid);
  require_valid(p);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
  if (!f) throw InputError("cannot write " + path.string());
}

int run_classify(const Common& c) {
  const LQProblem p = load(c);
  const RiccatiSolution P = integrate_regular_riccati(p, c.tol_rank);
  const Classification cls = classify(p, P, c.tol_range, c.tol_rank);
  std::cout << to_string(cls.verdict) << "\nm0: " << cls.m0 << '\n';
  return 0;
}

int run_solve(const Common& c, const std::string& mode, const std::string& p1_file,
              const std::string& out_dir, const std::vector<int>& oracle_steps) {
  const LQProblem p = load(c);
  SolveOptions o;
  o.mode = parse_mode(mode);
  o.tol.rank = c.tol_rank;
  o.tol.gamma = c.tol_gamma;
  o.tol.range = c.tol_range;
  o.oracle_steps = oracle_steps;
  if (!p1_file.empty()) o.p1_terminal = load_matrix(p1_file);

  const SolveReport r = solve(p, o);
  const fs::path out(out_dir);
  fs::create_directories(out);
  const std::string text = render_text(r);
  write_text(out / "report.txt", text);
  write_text(out / "report.json", render_json(r).dump(2) + "\n");
  if (r.trajectory) write_trajectory_csv(*r.trajectory, out / "trajectory.csv");
  std::cout << text;
  return static_cast<int>(r.exit_code);
}

int run_oracle(const Common& c, const std::vector<int>& steps) {
  const LQProblem p = load(c);
  std::cout << "N discrete_cost attained hessian_min_eigenvalue\n";
  for (int N : steps) {
    const OracleResult r = solve_discrete(discretize(p, N), p.x0);
    std::cout << N << ' ' << format_number(r.optimal_cost) << ' '
              << (r.attained ? "true" : "false") << ' '
              << format_number(r.hessian_min_eigenvalue) << '\n';
  }
  return 0;
}

int run_fixture(const std::string& name, const std::optional<int>& grid, const std::string& out_dir) {
  const LQProblem p = fixture(name, grid.value_or(kDefaultGridSteps));
  const fs::path out(out_dir);
  fs::create_directories(out);
  const fs::path path = out / (name + ".json");
  save_problem(p, path);
  std::cout << path.string() << '\n';
  return 0;
}

// Empty tokens (a bare --oracle-steps) are dropped, so the ladder can be skipped.
std::vector<int> parse_ladder(const std::vector<std::string>& tokens) {
  std::vector<int> out;
  for (const std::string& t : tokens) {
    if (t.empty()) continue;
    std::size_t used = 0;
    int N = 0;
    try {
      N = std::stoi(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size() || N < 2) throw InputError("--oracle-steps entries must be integers >= 2, got '" + t + "'");
    out.push_back(N);
  }
  return out;
}

void add_common(CLI::App* cmd, Common& c, bool tolerances) {
  cmd->add_option("file", c.file, "problem file (JSON)")->required();
  cmd->add_option("--grid", c.grid, "grid steps (overrides the problem file)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol-rank", c.tol_rank, "relative singular-value cutoff");
  cmd->add_option("--tol-range", c.tol_range, "range-inclusion tolerance");
  if (tolerances) cmd->add_option("--tol-gamma", c.tol_gamma, "Γ1 ≡ 0 tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-horizon LQ solver for regular and irregular problems"};
  app.require_subcommand(1);

  Common classify_opts, solve_opts, oracle_opts;
  CLI::App* classify_cmd = app.add_subcommand("classify", "print Regular/Irregular and m0");
  add_common(classify_cmd, classify_opts, false);

  std::string mode = "auto", p1_file, out_dir = ".";
  std::vector<std::string> solve_oracle_steps{"50", "100", "200"};
  CLI::App* solve_cmd = app.add_subcommand("solve", "run the full pipeline and write reports");
  add_common(solve_cmd, solve_opts, true);
  solve_cmd->add_option("--mode", mode, "open, closed or auto")
      ->check(CLI::IsMember({"open", "closed", "auto"}));
  solve_cmd->add_option("--p1-terminal", p1_file, "override P1(T) with a matrix file");
  solve_cmd->add_option("--out", out_dir, "output directory");
  solve_cmd->add_option("--oracle-steps", solve_oracle_steps, "oracle ladder N[,N...]; bare flag skips it")
      ->delimiter(',')
      ->expected(0, -1);

  std::vector<int> ladder;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "direct-transcription ladder");
  add_common(oracle_cmd, oracle_opts, false);
  oracle_cmd->add_option("--steps", ladder, "N[,N...]")->delimiter(',')->required();

  std::string fixture_name, fixture_out = ".";
  std::optional<int> fixture_grid;
  CLI::App* fixture_cmd = app.add_subcommand("fixture", "write a built-in example problem");
  fixture_cmd->add_option("name", fixture_name, "E1 or E2")
      ->required()
      ->check(CLI::IsMember({"E1", "E2"}));
  fixture_cmd->add_option("--grid", fixture_grid, "grid steps")->check(CLI::PositiveNumber);
  fixture_cmd->add_option("--out", fixture_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*classify_cmd) return run_classify(classify_opts);
    if (*solve_cmd) return run_solve(solve_opts, mode, p1_file, out_dir, parse_ladder(solve_oracle_steps));
    if (*oracle_cmd) {
      for (int N : ladder)
        if (N < 2) throw InputError("--steps entries must be at least 2");
      return run_oracle(oracle_opts, ladder);
    }
    if (*fixture_cmd) return run_fixture(fixture_name, fixture_grid, fixture_out);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const MisuseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
