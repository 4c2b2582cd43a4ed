#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "irlq/integrate.hpp"
#include "irlq/linalg.hpp"
#include "irlq/model.hpp"

namespace irlq {

enum class Verdict { Regular, Irregular };

std::string_view to_string(Verdict v);

struct Classification {
  Verdict verdict = Verdict::Regular;
  Eigen::Index m0 = 0;
  /// Range(Γ0(t)) ⊆ Range(Υ0(t)) at each node.
  std::vector<bool> per_node_inclusion;
};

/// First-layer quantities at one time instant.
///
/// With T0 orthogonal the partitions [∗ C0ᵀ] = Γ0ᵀ(I − Υ0†Υ0)T0⁻¹ and
/// [∗ B0] = B(I − Υ0†Υ0)T0⁻¹ are the trailing m − m0 columns.
struct ReducedNode {
  Eigen::Index m0 = 0;
  Mat upsilon0;       // R
  Mat upsilon0_pinv;  // R†
  Mat gamma0;         // BᵀP, m × n
  Mat b;              // B, n × m
  Mat c0;             // (m − m0) × n
  Mat b0;             // n × (m − m0)
  Mat g0;             // m × (m − m0)
  Mat a0;             // A − BΥ0†Γ0
  Mat d0;             // −BΥ0†Bᵀ
};

ReducedNode reduce_node(const Mat& a, const Mat& b, const Mat& r, const Mat& p,
                        double rank_tol = kDefaultRankTol);

struct DriftCoefficients {
  Mat a0;
  Mat d0;
};

/// Grids of the reduced data on the problem grid.
///
/// C0, B0 and G0 depend on the orthonormal basis chosen per node; only
/// basis-covariant products (C0ᵀC0, B0C0, G0C0, G0G0ᵀ, ...) are meaningful
/// across nodes. A0 and D0 are basis free.
struct ReducedSystem {
  TimeGrid grid;
  Eigen::Index m0 = 0;
  std::vector<Mat> riccati;  // P
  std::vector<Mat> upsilon0;
  std::vector<Mat> upsilon0_pinv;
  std::vector<Mat> gamma0;
  std::vector<Mat> b;
  std::vector<Mat> c0;
  std::vector<Mat> b0;
  std::vector<Mat> g0;
  std::vector<Mat> a0;
  std::vector<Mat> d0;

  /// Off-grid A0/D0 for RK4 stages. When empty, the a0/d0 grids are
  /// interpolated linearly.
  std::function<DriftCoefficients(double)> drift;

  std::size_t size() const { return a0.size(); }
  Eigen::Index n() const { return a0.empty() ? 0 : a0.front().rows(); }
  Eigen::Index reduced_inputs() const { return c0.empty() ? 0 : c0.front().rows(); }

  DriftCoefficients drift_at(double t) const;
  ReducedNode node(std::size_t i) const;
};

/// Per-node range inclusion Range(Γ0) ⊆ Range(Υ0). Throws
/// UnsupportedRankVariation when rank(R(t)) is not constant on the grid.
Classification classify(const LQProblem& p, const RiccatiSolution& P,
                        double tol = kDefaultRangeTol, double rank_tol = kDefaultRankTol);

/// Builds the reduced system node by node. A regular problem reduces to
/// empty C0, B0, G0.
ReducedSystem reduce(const LQProblem& p, const RiccatiSolution& P,
                     double rank_tol = kDefaultRankTol);

}  // namespace irlq
