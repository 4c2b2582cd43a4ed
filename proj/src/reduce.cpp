#include "irlq/reduce.hpp"

#include <algorithm>
#include <memory>
#include <string>

#include "irlq/errors.hpp"

namespace irlq {

std::string_view to_string(Verdict v) { return v == Verdict::Regular ? "Regular" : "Irregular"; }

ReducedNode reduce_node(const Mat& a, const Mat& b, const Mat& r, const Mat& p, double rank_tol) {
  const ProjectorDecomposition dec = projector_decomposition(r, rank_tol);
  const Eigen::Index m = r.rows();
  const Eigen::Index k = m - dec.m0;

  ReducedNode node;
  node.m0 = dec.m0;
  node.upsilon0 = r;
  node.upsilon0_pinv = dec.upsilon0_pinv;
  node.gamma0 = b.transpose() * p;
  node.b = b;
  // T0 is orthogonal, so T0⁻¹ = T0ᵀ.
  const Mat t0_inv = dec.t0.transpose();
  node.c0 = (node.gamma0.transpose() * dec.projector * t0_inv).rightCols(k).transpose();
  node.b0 = (b * dec.projector * t0_inv).rightCols(k);
  node.g0 = dec.g0;
  node.a0 = a - b * dec.upsilon0_pinv * node.gamma0;
  node.d0 = symmetrize(-b * dec.upsilon0_pinv * b.transpose());
  return node;
}

DriftCoefficients ReducedSystem::drift_at(double t) const {
  if (drift) return drift(t);
  if (!grid.contains(t)) throw InputError("reduced system: t outside horizon");
  const std::size_t k = grid.cell(t);
  const double w = std::clamp((t - grid.node(k)) / grid.step(), 0.0, 1.0);
  return {(1.0 - w) * a0[k] + w * a0[k + 1], (1.0 - w) * d0[k] + w * d0[k + 1]};
}

ReducedNode ReducedSystem::node(std::size_t i) const {
  ReducedNode out;
  out.m0 = m0;
  out.upsilon0 = upsilon0.at(i);
  out.upsilon0_pinv = upsilon0_pinv.at(i);
  out.gamma0 = gamma0.at(i);
  out.b = b.at(i);
  out.c0 = c0.at(i);
  out.b0 = b0.at(i);
  out.g0 = g0.at(i);
  out.a0 = a0.at(i);
  out.d0 = d0.at(i);
  return out;
}

namespace {

void check_grid(const LQProblem& p, const RiccatiSolution& P) {
  if (!(P.grid() == p.grid) || P.P.size() != p.grid.size())
    throw InputError("Riccati solution does not cover the problem grid");
}

std::string rank_variation_message(std::size_t node, double t, Eigen::Index got,
                                   Eigen::Index expected) {
  return "rank(R(t)) changes from " + std::to_string(expected) + " to " + std::to_string(got) +
         " at node " + std::to_string(node) + " (t = " + std::to_string(t) +
         "); time-varying reduced input dimension is not supported";
}

}  // namespace

Classification classify(const LQProblem& p, const RiccatiSolution& P, double tol,
                        double rank_tol) {
  check_grid(p, P);
  Classification out;
  out.per_node_inclusion.reserve(p.grid.size());
  bool all_included = true;
  for (std::size_t k = 0; k < p.grid.size(); ++k) {
    const double t = p.grid.node(k);
    const Mat r = p.r(t);
    const Mat gamma0 = p.b(t).transpose() * P[k];
    const Eigen::Index rank = pinv(r, rank_tol).rank;
    if (k == 0) out.m0 = rank;
    if (rank != out.m0) throw UnsupportedRankVariation(rank_variation_message(k, t, rank, out.m0));
    const bool included = range_included(gamma0, r, tol, rank_tol);
    out.per_node_inclusion.push_back(included);
    all_included = all_included && included;
  }
  out.verdict = all_included ? Verdict::Regular : Verdict::Irregular;
  return out;
}

ReducedSystem reduce(const LQProblem& p, const RiccatiSolution& P, double rank_tol) {
  check_grid(p, P);
  ReducedSystem out;
  out.grid = p.grid;
  for (std::size_t k = 0; k < p.grid.size(); ++k) {
    const double t = p.grid.node(k);
    ReducedNode node = reduce_node(p.a(t), p.b(t), p.r(t), P[k], rank_tol);
    if (k == 0) out.m0 = node.m0;
    if (node.m0 != out.m0)
      throw UnsupportedRankVariation(rank_variation_message(k, t, node.m0, out.m0));
    out.riccati.push_back(P[k]);
    out.upsilon0.push_back(std::move(node.upsilon0));
    out.upsilon0_pinv.push_back(std::move(node.upsilon0_pinv));
    out.gamma0.push_back(std::move(node.gamma0));
    out.b.push_back(std::move(node.b));
    out.c0.push_back(std::move(node.c0));
    out.b0.push_back(std::move(node.b0));
    out.g0.push_back(std::move(node.g0));
    out.a0.push_back(std::move(node.a0));
    out.d0.push_back(std::move(node.d0));
  }

  // A0 and D0 between nodes come from the Hermite-interpolated P, which keeps
  // the layer-two integration fourth order.
  auto problem = std::make_shared<const LQProblem>(p);
  auto riccati = std::make_shared<const RiccatiSolution>(P);
  out.drift = [problem, riccati, rank_tol](double t) -> DriftCoefficients {
    const Mat b = problem->b(t);
    const Mat r_pinv = pinv(problem->r(t), rank_tol).pinv;
    const Mat gamma0 = b.transpose() * riccati->at(t);
    return {problem->a(t) - b * r_pinv * gamma0, symmetrize(-b * r_pinv * b.transpose())};
  };
  return out;
}

}  // namespace irlq
