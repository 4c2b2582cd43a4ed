#pragma once

// Shared builders and randomized property checks for the unit tests and the
// acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "irlq/integrate.hpp"
#include "irlq/linalg.hpp"
#include "irlq/model.hpp"
#include "irlq/pipeline.hpp"
#include "irlq/reduce.hpp"
#include "irlq/synth.hpp"

namespace irlq::testing {

inline Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Mat scalar(double v) { return Mat::Constant(1, 1, v); }

inline LQProblem constant_problem(const Mat& a, const Mat& b, const Mat& q, const Mat& r,
                                  const Mat& h, const Vec& x0, int steps = 1000,
                                  double t0 = 0.0, double t_final = 1.0) {
  LQProblem p;
  p.n = static_cast<int>(a.rows());
  p.m = static_cast<int>(b.cols());
  p.grid = TimeGrid(t0, t_final, steps);
  p.A = MatrixFunction::constant(a);
  p.B = MatrixFunction::constant(b);
  p.Q = MatrixFunction::constant(q);
  p.R = MatrixFunction::constant(r);
  p.H = h;
  p.x0 = x0;
  return p;
}

/// a = 0, b = q = r = 1, H = 0 on [0, 1]: P(t) = tanh(1 − t).
inline LQProblem regular_scalar(int steps = 1000, double x0 = 1.0) {
  return constant_problem(scalar(0), scalar(1), scalar(1), scalar(1), scalar(0),
                          Vec::Constant(1, x0), steps);
}

/// Two states, three inputs: the first state copies E1, the second is
/// uncontrolled by the free input and carries no cost. P1 = diag(1/(t−2), 0).
inline LQProblem two_state_singular(int steps = 1000) {
  Vec x0(2);
  x0 << 1.0, 0.5;
  return constant_problem(Mat::Zero(2, 2), mat({{1, 1, 0}, {0, 0, 1}}), Mat::Zero(2, 2),
                          mat({{1, 0, 0}, {0, 0, 0}, {0, 0, 1}}), mat({{1, 0}, {0, 0}}), x0, steps);
}

inline Mat rotation(double angle) {
  return mat({{std::cos(angle), -std::sin(angle)}, {std::sin(angle), std::cos(angle)}});
}

/// two_state_singular in coordinates x̃ = S(t)x with S(t) a rotation by ωt:
/// Ã = ω·J, B̃ = S(t)B (sampled), H̃ = S(T) H S(T)ᵀ. The range of P1 turns
/// with time, which exercises the tracked basis and its derivative.
inline LQProblem rotating_singular(double omega, int steps = 1000, int samples = 8000) {
  const LQProblem base = two_state_singular(steps);
  const Mat b = base.B.at(0.0);
  std::vector<double> times;
  std::vector<Mat> values;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    times.push_back(t);
    values.push_back(rotation(omega * t) * b);
  }
  LQProblem p = base;
  p.A = MatrixFunction::constant(omega * mat({{0, -1}, {1, 0}}));
  p.B = MatrixFunction::sampled(times, values);
  const Mat s1 = rotation(omega);
  p.H = s1 * base.H * s1.transpose();
  p.x0 = base.x0;  // S(0) = I
  return p;
}

inline LQProblem scaled_costs(const LQProblem& p, double alpha) {
  LQProblem out = p;
  out.Q = MatrixFunction::constant(alpha * p.Q.at(p.grid.t0()));
  out.R = MatrixFunction::constant(alpha * p.R.at(p.grid.t0()));
  out.H = alpha * p.H;
  return out;
}

// ---------------------------------------------------------------------------
// Random generators (fixed seeds, so every run sees the same cases).

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  Mat gaussian(Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng_);
    return m;
  }

  /// Random matrix of the requested rank (≤ min(rows, cols)).
  Mat low_rank(Eigen::Index rows, Eigen::Index cols, Eigen::Index rank) {
    if (rank == 0) return Mat::Zero(rows, cols);
    return gaussian(rows, rank) * gaussian(rank, cols);
  }

  /// Symmetric PSD of the requested rank.
  Mat psd(Eigen::Index n, Eigen::Index rank, double scale = 1.0) {
    const Mat f = gaussian(n, rank, scale);
    return symmetrize(f * f.transpose());
  }

  Mat pd(Eigen::Index n, double scale = 1.0) { return psd(n, n, scale) + 0.5 * Mat::Identity(n, n); }

  /// Regular random problem with R positive definite, n, m ≤ 4. Entries are
  /// scaled so the Riccati equation stays non-stiff for RK4 at 100 steps.
  LQProblem regular_problem(int steps = 200) {
    const int n = integer(1, 4), m = integer(1, 4);
    return constant_problem(gaussian(n, n, 0.5), gaussian(n, m, 0.5), psd(n, integer(0, n), 0.7), pd(m, 0.7),
                            psd(n, integer(0, n), 0.5), gaussian(n, 1), steps);
  }

 private:
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Property suites. Each returns the number of cases and the worst observed
// value of the checked quantity.

struct PropertyOutcome {
  int cases = 0;
  double worst = 0.0;
  bool holds(double tol) const { return cases > 0 && worst <= tol; }
};

inline double penrose_defect(const Mat& m) {
  const Mat x = pinv(m).pinv;
  return std::max({(m * x * m - m).cwiseAbs().maxCoeff(), (x * m * x - x).cwiseAbs().maxCoeff(),
                   ((m * x).transpose() - m * x).cwiseAbs().maxCoeff(),
                   ((x * m).transpose() - x * m).cwiseAbs().maxCoeff()});
}

inline PropertyOutcome penrose_property(int cases = 200, std::uint64_t seed = 11) {
  Gen g(seed);
  PropertyOutcome out;
  for (int c = 0; c < cases; ++c) {
    const int rows = g.integer(1, 4), cols = g.integer(1, 4);
    const int rank = g.integer(0, std::min(rows, cols));
    out.worst = std::max(out.worst, penrose_defect(g.low_rank(rows, cols, rank)));
    ++out.cases;
  }
  return out;
}

inline PropertyOutcome projector_reconstruction_property(int cases = 200, std::uint64_t seed = 12) {
  Gen g(seed);
  PropertyOutcome out;
  for (int c = 0; c < cases; ++c) {
    const int m = g.integer(1, 4);
    const Mat upsilon = g.psd(m, g.integer(0, m));
    const ProjectorDecomposition d = projector_decomposition(upsilon);
    Mat stacked = Mat::Zero(m, m);
    stacked.bottomRows(m - d.m0) = d.upsilon_t0;
    const double defect = (d.t0.transpose() * stacked - d.projector).cwiseAbs().maxCoeff();
    out.worst = std::max(out.worst, defect);
    ++out.cases;
  }
  return out;
}

inline PropertyOutcome riccati_symmetry_property(int cases = 100, std::uint64_t seed = 13) {
  Gen g(seed);
  PropertyOutcome out;
  for (int c = 0; c < cases; ++c) {
    const LQProblem p = g.regular_problem(100);
    const RiccatiSolution P = integrate_regular_riccati(p);
    for (const Mat& v : P.P.values) out.worst = std::max(out.worst, asymmetry(v));
    ++out.cases;
  }
  return out;
}

/// E1 family (random horizon, terminal weight, grid): S = P + P1 obeys
/// Ṡ + SA + AᵀS − SBR†BᵀS + Q = 0. Ṡ by central differences.
inline PropertyOutcome combined_riccati_property(int cases = 100, std::uint64_t seed = 14) {
  Gen g(seed);
  PropertyOutcome out;
  for (int c = 0; c < cases; ++c) {
    const double t_final = g.uniform(0.5, 2.0);
    const double h = g.uniform(0.5, 3.0);
    const int steps = g.integer(500, 1500);
    const LQProblem p = constant_problem(scalar(0), mat({{1, 1}}), scalar(0), mat({{1, 0}, {0, 0}}),
                                         scalar(h), Vec::Constant(1, 1.0), steps, 0.0, t_final);
    const RiccatiSolution P = integrate_regular_riccati(p);
    const ReducedSystem reduced = reduce(p, P);
    const RiccatiSolution P1 = integrate_p1(reduced, *select_p1_terminal(reduced));
    const Mat a = p.A.at(0), b = p.B.at(0), q = p.Q.at(0), r_pinv = pinv(p.R.at(0)).pinv;
    for (std::size_t k = 1; k + 1 < p.grid.size(); ++k) {
      const Mat s = P[k] + P1[k];
      const Mat ds = (P[k + 1] + P1[k + 1] - P[k - 1] - P1[k - 1]) / (2.0 * p.grid.step());
      const Mat res = ds + s * a + a.transpose() * s - s * b * r_pinv * b.transpose() * s + q;
      out.worst = std::max(out.worst, res.norm());
    }
    ++out.cases;
  }
  return out;
}

/// Regular gains K0 = −R†BᵀP and, on the E1 family, the closed-loop K1 and
/// open-loop u1 are unchanged when (Q, R, H) are scaled by α > 0.
inline PropertyOutcome cost_scaling_property(int cases = 100, std::uint64_t seed = 15) {
  Gen g(seed);
  PropertyOutcome out;
  for (int c = 0; c < cases; ++c) {
    const double alpha = g.uniform(0.25, 4.0);
    if (c % 2 == 0) {
      const LQProblem p = g.regular_problem(100);
      const LQProblem q = scaled_costs(p, alpha);
      const RiccatiSolution Pp = integrate_regular_riccati(p), Pq = integrate_regular_riccati(q);
      const Controller cp = solve_regular(p, Pp, classify(p, Pp));
      const Controller cq = solve_regular(q, Pq, classify(q, Pq));
      for (std::size_t k = 0; k < p.grid.size(); ++k)
        out.worst = std::max(out.worst, (cp.k0[k] - cq.k0[k]).cwiseAbs().maxCoeff());
    } else {
      const double h = g.uniform(0.5, 3.0);
      const LQProblem p = constant_problem(scalar(0), mat({{1, 1}}), scalar(0), mat({{1, 0}, {0, 0}}),
                                           scalar(h), Vec::Constant(1, g.uniform(-2, 2)), 200);
      const LQProblem q = scaled_costs(p, alpha);
      auto layer = [](const LQProblem& prob, RiccatiSolution& P, ReducedSystem& red) {
        P = integrate_regular_riccati(prob);
        red = reduce(prob, P);
        return check_solvability(red, integrate_p1(red, *select_p1_terminal(red)));
      };
      RiccatiSolution Pp, Pq;
      ReducedSystem rp, rq;
      const LayerTwoSolution lp = layer(p, Pp, rp), lq = layer(q, Pq, rq);
      const Controller kp = std::get<Controller>(closed_loop_nonsingular(rp, lp));
      const Controller kq = std::get<Controller>(closed_loop_nonsingular(rq, lq));
      for (std::size_t k = 0; k < kp.k1.size(); ++k) {
        // Reduced quantities carry a per-node basis sign; compare through G0.
        const Mat a = rp.g0[k] * kp.k1[k], b = rq.g0[k] * kq.k1[k];
        out.worst = std::max(out.worst, (a - b).cwiseAbs().maxCoeff() / (1.0 + a.cwiseAbs().maxCoeff()));
      }
      const Controller op = std::get<Controller>(open_loop(p, rp, lp));
      const Controller oq = std::get<Controller>(open_loop(q, rq, lq));
      for (std::size_t k = 0; k < p.grid.size(); ++k) {
        const Mat a = rp.g0[k] * op.u1_profile[k], b = rq.g0[k] * oq.u1_profile[k];
        out.worst = std::max(out.worst, (a - b).cwiseAbs().maxCoeff());
      }
    }
    ++out.cases;
  }
  return out;
}

/// Regular problems through the full pipeline: Θ ≡ 0 and p = Px.
inline PropertyOutcome regular_theta_property(int cases = 100, std::uint64_t seed = 16) {
  Gen g(seed);
  PropertyOutcome out;
  SolveOptions o;
  o.oracle_steps.clear();
  for (int c = 0; c < cases; ++c) {
    const LQProblem p = g.regular_problem(100);
    const SolveReport r = solve(p, o);
    if (r.verdict != Verdict::Regular || !r.trajectory || r.layer_two) {
      out.worst = std::numeric_limits<double>::infinity();
    } else {
      for (const Vec& th : r.trajectory->theta) out.worst = std::max(out.worst, th.cwiseAbs().maxCoeff());
    }
    ++out.cases;
  }
  return out;
}

}  // namespace irlq::testing
