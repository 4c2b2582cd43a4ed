#include "irlq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "irlq/errors.hpp"

namespace irlq {

namespace {

int substeps_per_cell(int N) { return std::max(2, 2 * ((500 + N - 1) / N)); }

double simpson_weight(int j, int s) {
  if (j == 0 || j == s) return 1.0;
  return j % 2 == 1 ? 4.0 : 2.0;
}

// Square-root factor L with W = LᵀL; rows only for positive eigenvalues.
Mat cost_factor(const Mat& w, const char* what) {
  const SymmetricEigen eig = symmetric_eigen(symmetrize(w));
  const double top = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  if (eig.values.minCoeff() < -1e-10 * top)
    throw InputError(std::string("oracle: ") + what + " is indefinite (min eigenvalue " +
                     std::to_string(eig.values.minCoeff()) + ")");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > 1e-15 * top) keep.push_back(i);
  Mat l(static_cast<Eigen::Index>(keep.size()), w.cols());
  for (std::size_t r = 0; r < keep.size(); ++r)
    l.row(static_cast<Eigen::Index>(r)) =
        std::sqrt(eig.values(keep[r])) * eig.vectors.col(keep[r]).transpose();
  return l;
}

}  // namespace

DiscreteLQ discretize(const LQProblem& p, int N) {
  if (N < 2) throw InputError("discretize: N must be at least 2");
  require_valid(p);
  const int n = p.n, m = p.m;
  const int s = substeps_per_cell(N);
  const double t0 = p.grid.t0(), tf = p.grid.t_final();
  const double cell = (tf - t0) / N;
  const double h = cell / s;

  DiscreteLQ d;
  d.N = N;
  d.n = n;
  d.m = m;
  d.H = p.H;
  // M = [Φ Γ] solves Ṁ = A M + [0 B] from [I 0] across the cell.
  auto rhs = [&](double t, const Mat& M) -> Mat {
    Mat out = p.a(t) * M;
    out.rightCols(m) += p.b(t);
    return out;
  };
  for (int k = 0; k < N; ++k) {
    const double start = t0 + k * cell;
    const double end = k + 1 == N ? tf : t0 + (k + 1) * cell;
    Mat M = Mat::Zero(n, n + m);
    M.leftCols(n).setIdentity();
    Mat w = Mat::Zero(n + m, n + m);
    Mat z = Mat::Zero(n + m, n + m);
    z.bottomRightCorner(m, m).setIdentity();
    for (int j = 0; j <= s; ++j) {
      const double t = j == s ? end : start + j * h;
      z.topRows(n) = M;
      Mat weight = Mat::Zero(n + m, n + m);
      weight.topLeftCorner(n, n) = p.q(t);
      weight.bottomRightCorner(m, m) = p.r(t);
      w += (simpson_weight(j, s) * h / 3.0) * (z.transpose() * weight * z);
      if (j == s) break;
      const Mat k1 = rhs(t, M);
      const Mat k2 = rhs(t + 0.5 * h, M + 0.5 * h * k1);
      const Mat k3 = rhs(t + 0.5 * h, M + 0.5 * h * k2);
      const Mat k4 = rhs(j + 1 == s ? end : t + h, M + h * k3);
      M += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    d.phi.push_back(M.leftCols(n));
    d.gamma.push_back(M.rightCols(m));
    d.stage_cost.push_back(symmetrize(w));
  }
  return d;
}

OracleResult solve_discrete(const DiscreteLQ& d, const Vec& x0) {
  const int n = d.n, m = d.m, N = d.N;
  if (x0.size() != n) throw InputError("solve_discrete: x0 has the wrong length");
  if (static_cast<int>(d.phi.size()) != N || static_cast<int>(d.gamma.size()) != N ||
      static_cast<int>(d.stage_cost.size()) != N)
    throw InputError("solve_discrete: inconsistent discretization");
  const Eigen::Index cols = static_cast<Eigen::Index>(N) * m;

  std::vector<Mat> factors;
  Eigen::Index rows = 0;
  for (const Mat& w : d.stage_cost) {
    factors.push_back(cost_factor(w, "stage cost"));
    rows += factors.back().rows();
  }
  const Mat terminal = cost_factor(d.H, "terminal weight");
  rows += terminal.rows();

  // J(U) = ‖Z U + Z0 x0‖², built by propagating x_k = X_k U + Y_k x0.
  Mat Z = Mat::Zero(rows, cols);
  Mat Z0 = Mat::Zero(rows, n);
  Mat X = Mat::Zero(n, cols);
  Mat Y = Mat::Identity(n, n);
  Eigen::Index row = 0;
  for (int k = 0; k < N; ++k) {
    const Mat& l = factors[static_cast<std::size_t>(k)];
    const Eigen::Index r = l.rows();
    const Eigen::Index used = static_cast<Eigen::Index>(k) * m;
    if (r > 0) {
      Z.block(row, 0, r, used) = l.leftCols(n) * X.leftCols(used);
      Z.block(row, used, r, m) = l.rightCols(m);
      Z0.middleRows(row, r) = l.leftCols(n) * Y;
      row += r;
    }
    X.leftCols(used) = d.phi[k] * X.leftCols(used);
    X.middleCols(used, m) = d.gamma[k];
    Y = d.phi[k] * Y;
  }
  if (terminal.rows() > 0) {
    Z.bottomRows(terminal.rows()) = terminal * X;
    Z0.bottomRows(terminal.rows()) = terminal * Y;
  }

  const Vec offset = Z0 * x0;
  Mat hessian = Mat::Zero(cols, cols);
  hessian.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose());
  hessian = hessian.selfadjointView<Eigen::Lower>();
  const Vec g = Z.transpose() * offset;

  // Minimal-norm minimizer −ℋ†g without a full eigendecomposition: a
  // pivoted LDLᵀ gives one minimizer and spans the null space, which is then
  // projected out.
  const Eigen::LDLT<Mat> ldlt(hessian);
  // info() also reports zero pivots with round-off left in their column; for
  // a PSD matrix pivoted by the largest diagonal that only happens once the
  // remaining block is negligible, so only non-finite factors are fatal.
  const Vec pivots = ldlt.vectorD();
  if (!all_finite(pivots) || !all_finite(ldlt.matrixLDLT()))
    throw NumericalError("oracle: LDLT factorization of the Hessian failed");
  const double d_top = std::max(pivots.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double cutoff = std::numeric_limits<double>::epsilon() * static_cast<double>(cols) * d_top;
  std::vector<Eigen::Index> null_index;
  Vec y = ldlt.transpositionsP() * (-g);
  ldlt.matrixL().solveInPlace(y);
  for (Eigen::Index i = 0; i < cols; ++i) {
    if (pivots(i) > cutoff) {
      y(i) /= pivots(i);
    } else {
      y(i) = 0.0;
      null_index.push_back(i);
    }
  }
  ldlt.matrixU().solveInPlace(y);
  Vec u = ldlt.transpositionsP().transpose() * y;
  if (!null_index.empty()) {
    const Eigen::Index k = static_cast<Eigen::Index>(null_index.size());
    Mat basis = Mat::Zero(cols, k);
    for (Eigen::Index j = 0; j < k; ++j) basis(null_index[static_cast<std::size_t>(j)], j) = 1.0;
    ldlt.matrixU().solveInPlace(basis);
    basis = ldlt.transpositionsP().transpose() * basis;
    const Eigen::HouseholderQR<Mat> qr(basis);
    const Mat q = qr.householderQ() * Mat::Identity(cols, k);
    u -= q * (q.transpose() * u);
  }

  OracleResult out;
  out.hessian_min_eigenvalue = symmetric_eigenvalues(hessian).minCoeff();
  out.optimal_cost = (Z * u + offset).squaredNorm();
  out.attained = (hessian * u + g).norm() <= 1e-8 * (1.0 + g.norm());
  for (int k = 0; k < N; ++k) out.optimal_controls.push_back(u.segment(static_cast<Eigen::Index>(k) * m, m));
  return out;
}

ComparisonReport compare(const LQProblem& p, double continuous_cost,
                         const std::vector<int>& ladder, double tol_opt) {
  ComparisonReport out;
  out.continuous_cost = continuous_cost;
  out.tol = tol_opt;
  const bool has_reference = std::isfinite(continuous_cost);
  for (int N : ladder) {
    const OracleResult r = solve_discrete(discretize(p, N), p.x0);
    OracleRung rung;
    rung.N = N;
    rung.discrete_cost = r.optimal_cost;
    rung.attained = r.attained;
    rung.hessian_min_eigenvalue = r.hessian_min_eigenvalue;
    rung.gap = has_reference ? std::abs(continuous_cost - r.optimal_cost)
                             : std::numeric_limits<double>::quiet_NaN();
    rung.below_continuous = has_reference && r.optimal_cost <= continuous_cost + tol_opt;
    out.rungs.push_back(rung);
  }
  // Without a reference cost the trend is judged on successive refinements.
  for (std::size_t i = 1; i < out.rungs.size(); ++i) {
    if (has_reference) {
      if (out.rungs[i].gap > out.rungs[i - 1].gap + 1e-6) out.monotone = false;
    } else if (i >= 2) {
      const double prev = std::abs(out.rungs[i - 1].discrete_cost - out.rungs[i - 2].discrete_cost);
      const double cur = std::abs(out.rungs[i].discrete_cost - out.rungs[i - 1].discrete_cost);
      if (cur > prev + 1e-6) out.monotone = false;
    }
  }
  return out;
}

ComparisonReport compare(const LQProblem& p, const Trajectory& traj, const std::vector<int>& ladder,
                         double tol_opt) {
  if (!(traj.grid == p.grid)) throw InputError("compare: trajectory grid differs from the problem");
  return compare(p, traj.cost, ladder, tol_opt);
}

}  // namespace irlq
