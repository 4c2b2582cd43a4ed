#include "irlq/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "irlq/errors.hpp"
#include "irlq/reduce.hpp"

namespace irlq {

namespace {

using Rhs = std::function<Mat(double, const Mat&)>;

// Marches dY/dt = f(t, Y) from the terminal node back to t0 with classical RK4.
std::vector<Mat> rk4_backward(const TimeGrid& grid, const Mat& terminal, const Rhs& f,
                              bool symmetric, const char* what) {
  const std::size_t n_nodes = grid.size();
  std::vector<Mat> y(n_nodes);
  y.back() = terminal;
  const double h = -grid.step();
  for (std::size_t k = n_nodes - 1; k > 0; --k) {
    const double t = grid.node(k);
    const Mat& yk = y[k];
    const Mat k1 = f(t, yk);
    const Mat k2 = f(t + 0.5 * h, yk + 0.5 * h * k1);
    const Mat k3 = f(t + 0.5 * h, yk + 0.5 * h * k2);
    const Mat k4 = f(grid.node(k - 1), yk + h * k3);
    Mat next = yk + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (symmetric) next = symmetrize(next);
    if (!all_finite(next)) throw DivergenceError(k - 1, grid.node(k - 1), what);
    y[k - 1] = std::move(next);
  }
  return y;
}

std::vector<Mat> rk4_forward(const TimeGrid& grid, const Mat& initial, const Rhs& f,
                             const char* what) {
  const std::size_t n_nodes = grid.size();
  std::vector<Mat> y(n_nodes);
  y.front() = initial;
  const double h = grid.step();
  for (std::size_t k = 0; k + 1 < n_nodes; ++k) {
    const double t = grid.node(k);
    const Mat& yk = y[k];
    const Mat k1 = f(t, yk);
    const Mat k2 = f(t + 0.5 * h, yk + 0.5 * h * k1);
    const Mat k3 = f(t + 0.5 * h, yk + 0.5 * h * k2);
    const Mat k4 = f(grid.node(k + 1), yk + h * k3);
    Mat next = yk + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!all_finite(next)) throw DivergenceError(k + 1, grid.node(k + 1), what);
    y[k + 1] = std::move(next);
  }
  return y;
}

RiccatiSolution finish(const TimeGrid& grid, std::vector<Mat> values, const Rhs& f) {
  RiccatiSolution sol;
  sol.P.grid = grid;
  sol.P.values = std::move(values);
  sol.derivative.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    sol.derivative.push_back(f(grid.node(k), sol.P.values[k]));
  const double h = grid.step();
  for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
    const Mat fd = (sol.P.values[k + 1] - sol.P.values[k - 1]) / (2.0 * h);
    sol.residual_norm = std::max(sol.residual_norm, (fd - sol.derivative[k]).norm());
  }
  return sol;
}

}  // namespace

Mat MatrixGridFunction::interpolate(double t) const {
  if (!grid.contains(t))
    throw InputError("grid function: t = " + std::to_string(t) + " outside horizon");
  const std::size_t k = grid.cell(t);
  const double w = std::clamp((t - grid.node(k)) / grid.step(), 0.0, 1.0);
  if (w == 0.0) return values[k];
  if (w == 1.0) return values[k + 1];
  return (1.0 - w) * values[k] + w * values[k + 1];
}

Mat RiccatiSolution::at(double t) const {
  const TimeGrid& g = grid();
  if (!g.contains(t))
    throw InputError("riccati solution: t = " + std::to_string(t) + " outside horizon");
  const std::size_t k = g.cell(t);
  const double h = g.step();
  const double s = std::clamp((t - g.node(k)) / h, 0.0, 1.0);
  if (s == 0.0) return P.values[k];
  if (s == 1.0) return P.values[k + 1];
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * P.values[k] + (h10 * h) * derivative[k] + h01 * P.values[k + 1] +
         (h11 * h) * derivative[k + 1];
}

RiccatiSolution integrate_regular_riccati(const LQProblem& p, double rank_tol) {
  require_valid(p);
  const Rhs f = [&p, rank_tol](double t, const Mat& P) -> Mat {
    const Mat a = p.a(t), b = p.b(t);
    const Mat gamma0 = b.transpose() * P;
    const Mat r_pinv = pinv(p.r(t), rank_tol).pinv;
    return -(a.transpose() * P + P * a + p.q(t) - gamma0.transpose() * r_pinv * gamma0);
  };
  std::vector<Mat> values = rk4_backward(p.grid, p.H, f, true, "regular Riccati equation");
  return finish(p.grid, std::move(values), f);
}

RiccatiSolution integrate_p1(const ReducedSystem& reduced, const Mat& p1_terminal) {
  const Eigen::Index n = reduced.n();
  if (p1_terminal.rows() != n || p1_terminal.cols() != n)
    throw InputError("integrate_p1: terminal value must be n x n");
  if (!all_finite(p1_terminal)) throw InputError("integrate_p1: terminal value is not finite");
  if (asymmetry(p1_terminal) > 1e-9 * std::max(1.0, p1_terminal.cwiseAbs().maxCoeff()))
    throw InputError("integrate_p1: terminal value must be symmetric");
  if (reduced.size() != reduced.grid.size())
    throw InputError("integrate_p1: reduced system does not cover the grid");

  const Rhs f = [&reduced](double t, const Mat& P1) -> Mat {
    const DriftCoefficients c = reduced.drift_at(t);
    return -(P1 * c.a0 + c.a0.transpose() * P1 + P1 * c.d0 * P1);
  };
  std::vector<Mat> values =
      rk4_backward(reduced.grid, symmetrize(p1_terminal), f, true, "layer-two Riccati equation");
  // Keep the supplied terminal value bit-exact.
  values.back() = symmetrize(p1_terminal);
  return finish(reduced.grid, std::move(values), f);
}

MatrixGridFunction transition_family(const ReducedSystem& reduced, double t_ref) {
  const TimeGrid& grid = reduced.grid;
  if (!grid.contains(t_ref)) throw InputError("transition_family: t_ref outside horizon");
  const double pos = (t_ref - grid.t0()) / grid.step();
  const double idx = std::round(pos);
  if (std::abs(pos - idx) > 1e-9) throw InputError("transition_family: t_ref is not a grid node");
  const std::size_t ref = static_cast<std::size_t>(idx);

  const Eigen::Index n = reduced.n();
  const Rhs f = [&reduced](double t, const Mat& psi) -> Mat {
    return -reduced.drift_at(t).a0.transpose() * psi;
  };
  const std::vector<Mat> psi =
      rk4_forward(grid, Mat::Identity(n, n), f, "transition matrix equation");

  MatrixGridFunction out;
  out.grid = grid;
  out.values.reserve(grid.size());
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (s == ref) {
      out.values.push_back(Mat::Identity(n, n));
      continue;
    }
    Eigen::FullPivLU<Mat> lu(psi[s]);
    const Vec sv = Eigen::JacobiSVD<Mat>(psi[s]).singularValues();
    if (!lu.isInvertible() || sv(sv.size() - 1) <= 1e-14 * sv(0))
      throw ConditioningError("transition_family: fundamental matrix singular at node " +
                              std::to_string(s));
    // Ψ(t_ref) Ψ(s)⁻¹ = (Ψ(s)⁻ᵀ Ψ(t_ref)ᵀ)ᵀ
    Mat value = psi[s].transpose().fullPivLu().solve(psi[ref].transpose()).transpose();
    out.values.push_back(std::move(value));
  }
  return out;
}

namespace {

template <class T>
T simpson(const std::vector<T>& v, double h, T zero) {
  const std::size_t intervals = v.size() - 1;
  if (intervals == 1) return 0.5 * h * (v[0] + v[1]);
  T acc = zero;
  std::size_t even_end = intervals;
  if (intervals % 2 == 1) even_end = intervals - 3;
  for (std::size_t k = 0; k + 2 <= even_end; k += 2)
    acc += (h / 3.0) * (v[k] + 4.0 * v[k + 1] + v[k + 2]);
  if (even_end != intervals) {
    const std::size_t k = even_end;
    acc += (3.0 * h / 8.0) * (v[k] + 3.0 * v[k + 1] + 3.0 * v[k + 2] + v[k + 3]);
  }
  return acc;
}

}  // namespace

Mat quadrature(const MatrixGridFunction& values) {
  if (values.size() < 2 || values.size() != values.grid.size())
    throw InputError("quadrature: need one value per node and at least two nodes");
  return simpson<Mat>(values.values, values.grid.step(),
                      Mat::Zero(values.front().rows(), values.front().cols()));
}

double quadrature(const TimeGrid& grid, const std::vector<double>& values) {
  if (values.size() < 2 || values.size() != grid.size())
    throw InputError("quadrature: need one value per node and at least two nodes");
  return simpson<double>(values, grid.step(), 0.0);
}

}  // namespace irlq
