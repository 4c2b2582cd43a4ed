#include "irlq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "irlq/errors.hpp"

namespace irlq {

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::RegularFeedback:
      return "RegularFeedback";
    case ControllerKind::IrregularOpenLoop:
      return "IrregularOpenLoop";
    case ControllerKind::IrregularClosedLoop:
      return "IrregularClosedLoop";
  }
  return "?";
}

Vec ControlLaw::operator()(double t, const Vec& x) const {
  if (!grid.contains(t)) throw InputError("control law: t outside horizon");
  const std::size_t k = grid.cell(t);
  const double w = std::clamp((t - grid.node(k)) / grid.step(), 0.0, 1.0);
  auto lerp = [&](const auto& v) { return ((1.0 - w) * v[k] + w * v[k + 1]).eval(); };

  Vec u = lerp(feedback) * x;
  if (singular()) {
    const double gap = t - grid.t_final();
    if (gap > -1e-12 * grid.step())
      throw InputError("control law: singular gain cannot be evaluated at the terminal time");
    u += (lerp(singular_feedback) / gap) * x;
  }
  if (!feedforward.empty()) u += lerp(feedforward);
  return u;
}

namespace {

MatrixGridFunction grid_function(const TimeGrid& grid, std::vector<Mat> values) {
  return MatrixGridFunction{grid, std::move(values)};
}

std::vector<Mat> zeros(std::size_t count, Eigen::Index rows, Eigen::Index cols) {
  return std::vector<Mat>(count, Mat::Zero(rows, cols));
}

// Regular part of the full input: −Υ0†(Γ0 + Bᵀ P1).
Mat regular_part(const ReducedSystem& reduced, std::size_t k, const Mat& p1) {
  return -reduced.upsilon0_pinv[k] * (reduced.gamma0[k] + reduced.b[k].transpose() * p1);
}

// Appends a value for the terminal node by linear extrapolation; the
// closed-loop gains are defined on t0 … T − h only.
template <class T>
void extrapolate_terminal(std::vector<T>& v) {
  if (v.size() >= 2)
    v.push_back((2.0 * v[v.size() - 1] - v[v.size() - 2]).eval());
  else
    v.push_back(v.back());
}

Controller irregular_base(const ReducedSystem& reduced, const LayerTwoSolution& l2) {
  Controller c;
  c.riccati = grid_function(reduced.grid, reduced.riccati);
  c.theta_gain = l2.p1.P;
  c.p1_terminal = l2.p1.P.back();
  c.law.grid = reduced.grid;
  const Mat& p1_t = l2.p1.P.back();
  c.law.terminal_projector = Mat::Identity(p1_t.rows(), p1_t.cols()) - pinv(p1_t).pinv * p1_t;
  return c;
}

void require_irregular(const ReducedSystem& reduced, const LayerTwoSolution& l2,
                       const char* what) {
  if (reduced.size() != reduced.grid.size() || l2.p1.P.size() != reduced.grid.size())
    throw InputError(std::string(what) + ": layer-two solution does not cover the grid");
  if (!l2.solvable) throw MisuseError(std::string(what) + ": layer-two condition Γ1 = 0 fails");
}

std::optional<Mat> symmetric_min_norm_solution(const Mat& l, const Mat& n, double tol,
                                               double rank_tol) {
  // Orthonormal basis of symmetric matrices under the Frobenius inner
  // product, so the minimal-norm coefficient vector is the minimal-norm X.
  const Eigen::Index dim = l.cols();
  std::vector<Mat> basis;
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = i; j < dim; ++j) {
      Mat e = Mat::Zero(dim, dim);
      if (i == j) {
        e(i, i) = 1.0;
      } else {
        e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
      }
      basis.push_back(std::move(e));
    }
  Mat op(n.size(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t c = 0; c < basis.size(); ++c)
    op.col(static_cast<Eigen::Index>(c)) = (l * basis[c]).reshaped();
  const Vec rhs = n.reshaped();
  const Vec coeff = pinv(op, rank_tol).pinv * rhs;
  Mat x = Mat::Zero(dim, dim);
  for (std::size_t c = 0; c < basis.size(); ++c) x += coeff(static_cast<Eigen::Index>(c)) * basis[c];
  if ((l * x - n).norm() > tol * (1.0 + n.norm())) return std::nullopt;
  return x;
}

}  // namespace

Controller solve_regular(const LQProblem& p, const RiccatiSolution& P, const Classification& c,
                         double rank_tol) {
  if (c.verdict != Verdict::Regular)
    throw MisuseError("solve_regular: problem is irregular; use the layer-two synthesis");
  if (!(P.grid() == p.grid)) throw InputError("solve_regular: grid mismatch");
  std::vector<Mat> gains;
  gains.reserve(p.grid.size());
  for (std::size_t k = 0; k < p.grid.size(); ++k) {
    const double t = p.grid.node(k);
    const Mat b = p.b(t);
    gains.push_back(-pinv(p.r(t), rank_tol).pinv * b.transpose() * P[k]);
  }
  return feedback_controller(p, P, std::move(gains));
}

Controller feedback_controller(const LQProblem& p, const RiccatiSolution& P,
                               std::vector<Mat> gains) {
  if (gains.size() != p.grid.size()) throw InputError("feedback_controller: one gain per node");
  for (const Mat& k : gains)
    if (k.rows() != p.m || k.cols() != p.n) throw InputError("feedback_controller: gain must be m x n");
  Controller c;
  c.kind = ControllerKind::RegularFeedback;
  c.riccati = P.P;
  c.theta_gain = grid_function(p.grid, zeros(p.grid.size(), p.n, p.n));
  c.p1_terminal = Mat::Zero(p.n, p.n);
  c.k0 = grid_function(p.grid, gains);
  c.law.grid = p.grid;
  c.law.feedback = std::move(gains);
  c.law.terminal_projector = Mat::Identity(p.n, p.n);
  return c;
}

std::optional<Mat> select_p1_terminal(const ReducedSystem& reduced, double tol, double rank_tol) {
  const std::size_t last = reduced.size() - 1;
  const Mat l = reduced.b0[last].transpose();
  const Mat n = -reduced.c0[last];
  const Eigen::Index dim = reduced.n();
  if (l.rows() == 0) return Mat::Zero(dim, dim);

  const std::optional<Mat> x = solve_linear_matrix_eq(l, Mat::Identity(dim, dim), n, tol,
                                                      std::nullopt, rank_tol);
  if (!x) return std::nullopt;
  const Mat sym = symmetrize(*x);
  if ((l * sym - n).norm() <= tol * (1.0 + n.norm())) return sym;
  // Symmetrizing the minimal-norm solution broke the equation; look for the
  // minimal-norm solution inside the symmetric matrices directly.
  return symmetric_min_norm_solution(l, n, tol, rank_tol);
}

LayerTwoSolution check_solvability(const ReducedSystem& reduced, const RiccatiSolution& P1,
                                   double tol_gamma) {
  if (P1.P.size() != reduced.size()) throw InputError("check_solvability: grid mismatch");
  LayerTwoSolution out;
  out.p1 = P1;
  out.p1_terminal = P1.P.back();
  double p1_max = 0.0;
  out.gamma1_norms.reserve(reduced.size());
  for (std::size_t k = 0; k < reduced.size(); ++k) {
    const Mat gamma1 = reduced.c0[k] + reduced.b0[k].transpose() * P1[k];
    const double g = gamma1.norm();
    out.gamma1_norms.push_back(g);
    out.gamma1_max = std::max(out.gamma1_max, g);
    p1_max = std::max(p1_max, P1[k].norm());
  }
  out.solvable = out.gamma1_max <= tol_gamma * (1.0 + p1_max);
  return out;
}

OpenLoopOutcome open_loop(const LQProblem& p, const ReducedSystem& reduced,
                          const LayerTwoSolution& l2, double tol_range, double rank_tol) {
  require_irregular(reduced, l2, "open_loop");
  if (!(p.grid == reduced.grid)) throw InputError("open_loop: grid mismatch");
  const TimeGrid& grid = reduced.grid;

  const MatrixGridFunction p2 = transition_family(reduced, grid.t0());
  MatrixGridFunction integrand{grid, {}};
  integrand.values.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Mat c0p2 = reduced.c0[k] * p2[k].transpose();
    integrand.values.push_back(c0p2.transpose() * c0p2);
  }
  const Mat gramian = symmetrize(quadrature(integrand));
  const Mat& p1_start = l2.p1[0];

  const RankedPinv g_pinv = pinv(gramian, rank_tol);
  if (!range_included(p1_start, gramian, tol_range, rank_tol))
    return NotOpenLoopSolvable{(gramian * g_pinv.pinv * p1_start - p1_start).norm()};

  Controller c = irregular_base(reduced, l2);
  c.kind = ControllerKind::IrregularOpenLoop;
  c.gramian = gramian;
  c.zeta = g_pinv.pinv * p1_start * p.x0;
  std::vector<Mat> u1;
  u1.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    u1.push_back(reduced.c0[k] * p2[k].transpose() * c.zeta);
    c.law.feedback.push_back(regular_part(reduced, k, l2.p1[k]));
    c.law.feedforward.push_back(reduced.g0[k] * u1.back());
  }
  c.u1_profile = grid_function(grid, std::move(u1));
  return c;
}

ClosedLoopOutcome closed_loop_nonsingular(const ReducedSystem& reduced,
                                          const LayerTwoSolution& l2, double tol,
                                          double rank_tol) {
  require_irregular(reduced, l2, "closed_loop_nonsingular");
  const TimeGrid& grid = reduced.grid;
  const Eigen::Index n = reduced.n();
  const std::size_t last = grid.size() - 1;

  Controller c = irregular_base(reduced, l2);
  c.kind = ControllerKind::IrregularClosedLoop;
  c.closed_loop_path = "nonsingular";
  for (std::size_t k = 0; k < last; ++k) {
    const double t = grid.node(k);
    if (pinv(l2.p1[k], rank_tol).rank != n)
      return Unsupported{"P1 is singular at node " + std::to_string(k) + " (t = " +
                         std::to_string(t) + ")"};
    const Mat closed = reduced.a0[k] + reduced.d0[k] * l2.p1[k];
    const Mat target = Mat::Identity(n, n) / (t - grid.t_final()) - closed;
    const std::optional<Mat> gain =
        solve_linear_matrix_eq(reduced.b0[k], Mat::Identity(n, n), target, tol, std::nullopt,
                               rank_tol);
    if (!gain) return NoGain{k, t, "B0 K1 = I/(t - T) - A0 - D0 P1 has no solution"};

    // Minimal-norm K1 = B0† target splits into bounded and 1/(t − T) parts.
    const Mat b0_pinv = pinv(reduced.b0[k], rank_tol).pinv;
    c.k1.push_back(*gain);
    c.law.feedback.push_back(regular_part(reduced, k, l2.p1[k]) -
                             reduced.g0[k] * b0_pinv * closed);
    c.law.singular_feedback.push_back(reduced.g0[k] * b0_pinv);
  }
  extrapolate_terminal(c.law.feedback);
  extrapolate_terminal(c.law.singular_feedback);
  return c;
}

ClosedLoopOutcome closed_loop_singular(const ReducedSystem& reduced, const LayerTwoSolution& l2,
                                       double tol, double rank_tol, double overlap_threshold) {
  require_irregular(reduced, l2, "closed_loop_singular");
  const TimeGrid& grid = reduced.grid;
  const Eigen::Index n = reduced.n();
  const std::size_t last = grid.size() - 1;

  const Eigen::Index r = pinv(l2.p1[0], rank_tol).rank;
  for (std::size_t k = 1; k < last; ++k)
    if (pinv(l2.p1[k], rank_tol).rank != r)
      return Unsupported{"rank of P1 changes at node " + std::to_string(k)};
  if (r == n) {
    ClosedLoopOutcome out = closed_loop_nonsingular(reduced, l2, tol, rank_tol);
    if (auto* c = std::get_if<Controller>(&out)) c->closed_loop_path = "singular->nonsingular";
    return out;
  }

  Controller c = irregular_base(reduced, l2);
  c.kind = ControllerKind::IrregularClosedLoop;
  c.closed_loop_path = "singular";

  if (r == 0) {
    // P1 ≡ 0: the first block row is empty and K = 0 is admissible.
    const Eigen::Index k_dim = reduced.reduced_inputs();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (k < last) c.k1.push_back(Mat::Zero(k_dim, n));
      c.law.feedback.push_back(regular_part(reduced, k, l2.p1[k]));
    }
    return c;
  }

  // Orthonormal basis of Range(P1(t)), carried from node to node by the
  // orthogonal Procrustes rotation closest to the previous basis.
  std::vector<Mat> basis;
  basis.reserve(last);
  for (std::size_t k = 0; k < last; ++k) {
    const SymmetricEigen eig = symmetric_eigen(symmetrize(l2.p1[k]));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(eig.values(a)) > std::abs(eig.values(b));
    });
    Mat u(n, r);
    for (Eigen::Index j = 0; j < r; ++j) u.col(j) = eig.vectors.col(order[static_cast<std::size_t>(j)]);
    if (k == 0) {
      normalize_column_signs(u);
      basis.push_back(std::move(u));
      continue;
    }
    const Mat overlap = u.transpose() * basis.back();
    Eigen::JacobiSVD<Mat> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double min_cos = svd.singularValues().minCoeff();
    if (min_cos < overlap_threshold)
      return Unsupported{"eigenstructure of P1 not trackable at node " + std::to_string(k) +
                         " (subspace overlap " + std::to_string(min_cos) + ")"};
    basis.push_back(u * svd.matrixU() * svd.matrixV().transpose());
  }

  const double h = grid.step();
  auto basis_rate = [&](std::size_t k) -> Mat {
    if (last < 3) return Mat::Zero(n, r);
    if (k == 0) return (-3.0 * basis[0] + 4.0 * basis[1] - basis[2]) / (2.0 * h);
    if (k == last - 1)
      return (3.0 * basis[k] - 4.0 * basis[k - 1] + basis[k - 2]) / (2.0 * h);
    return (basis[k + 1] - basis[k - 1]) / (2.0 * h);
  };

  for (std::size_t k = 0; k < last; ++k) {
    const double t = grid.node(k);
    const Mat& v = basis[k];
    const Mat closed = reduced.a0[k] + reduced.d0[k] * l2.p1[k];
    const Mat drift = basis_rate(k).transpose() + v.transpose() * closed;
    const Mat b1 = v.transpose() * reduced.b0[k];
    const Mat target = v.transpose() / (t - grid.t_final()) - drift;
    const std::optional<Mat> gain =
        solve_linear_matrix_eq(b1, Mat::Identity(n, n), target, tol, std::nullopt, rank_tol);
    if (!gain) return NoGain{k, t, "first block row of the transformed closed loop has no solution"};

    const Mat b1_pinv = pinv(b1, rank_tol).pinv;
    c.k1.push_back(*gain);
    c.law.feedback.push_back(regular_part(reduced, k, l2.p1[k]) - reduced.g0[k] * b1_pinv * drift);
    c.law.singular_feedback.push_back(reduced.g0[k] * b1_pinv * v.transpose());
  }
  extrapolate_terminal(c.law.feedback);
  extrapolate_terminal(c.law.singular_feedback);
  return c;
}

ControlFunction assemble_full_control(const ReducedSystem& reduced, const LayerTwoSolution& l2,
                                      ControlFunction u1_at) {
  if (l2.p1.P.size() != reduced.size())
    throw InputError("assemble_full_control: layer-two solution does not cover the grid");
  return [&reduced, &l2, u1_at = std::move(u1_at)](double t, const Vec& x) -> Vec {
    const TimeGrid& grid = reduced.grid;
    const double pos = (t - grid.t0()) / grid.step();
    const double idx = std::round(pos);
    if (std::abs(pos - idx) > 1e-9 || idx < 0 || idx > grid.steps())
      throw InputError("assemble_full_control: t is not a grid node");
    const std::size_t k = static_cast<std::size_t>(idx);
    const Vec theta = l2.p1[k] * x;
    Vec u = -reduced.upsilon0_pinv[k] * (reduced.gamma0[k] * x + reduced.b[k].transpose() * theta);
    if (reduced.g0[k].cols() > 0) u += reduced.g0[k] * u1_at(t, x);
    return u;
  };
}

}  // namespace irlq
