#include <doctest.h>

#include <cmath>

#include "irlq/errors.hpp"
#include "irlq/integrate.hpp"
#include "irlq/reduce.hpp"
#include "support.hpp"

using namespace irlq;
using irlq::testing::mat;
using irlq::testing::scalar;

TEST_CASE("E1 reduces to one singular input") {
  const LQProblem p = fixture("E1");
  const RiccatiSolution P = integrate_regular_riccati(p);
  const Classification c = classify(p, P);
  CHECK(c.verdict == Verdict::Irregular);
  CHECK(c.m0 == 1);
  CHECK(c.per_node_inclusion.size() == p.grid.size());
  for (bool inc : c.per_node_inclusion) CHECK_FALSE(inc);

  const ReducedSystem r = reduce(p, P);
  CHECK(r.m0 == 1);
  CHECK(r.n() == 1);
  CHECK(r.reduced_inputs() == 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double pk = 1.0 / (2.0 - p.grid.node(k));
    // Basis-free products: A0 = −P, D0 = −1, C0ᵀC0 = P², B0C0 = P, G0G0ᵀ = diag(0, 1).
    worst = std::max(worst, std::abs(r.a0[k](0, 0) + pk));
    worst = std::max(worst, std::abs(r.d0[k](0, 0) + 1.0));
    worst = std::max(worst, std::abs((r.c0[k].transpose() * r.c0[k])(0, 0) - pk * pk));
    worst = std::max(worst, std::abs((r.b0[k] * r.c0[k])(0, 0) - pk));
    worst = std::max(worst, (r.g0[k] * r.g0[k].transpose() - mat({{0, 0}, {0, 1}})).norm());
    worst = std::max(worst, (r.g0[k] * r.c0[k] - mat({{0}, {pk}})).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("E2 reduction mirrors E1 with its own Riccati solution") {
  const LQProblem p = fixture("E2");
  const RiccatiSolution P = integrate_regular_riccati(p);
  CHECK(classify(p, P).verdict == Verdict::Irregular);
  const ReducedSystem r = reduce(p, P);
  for (std::size_t k = 0; k < r.size(); k += 100) {
    CHECK(r.a0[k](0, 0) == doctest::Approx(-P[k](0, 0)).epsilon(1e-12));
    CHECK(r.d0[k](0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK((r.b0[k] * r.c0[k])(0, 0) == doctest::Approx(P[k](0, 0)).epsilon(1e-12));
  }
}

TEST_CASE("positive definite control weight is regular") {
  const LQProblem p = irlq::testing::constant_problem(scalar(0), mat({{1, 1}}), scalar(1), Mat::Identity(2, 2),
                                                      scalar(1), Vec::Ones(1), 200);
  const RiccatiSolution P = integrate_regular_riccati(p);
  const Classification c = classify(p, P);
  CHECK(c.verdict == Verdict::Regular);
  CHECK(c.m0 == 2);
  const ReducedSystem r = reduce(p, P);
  CHECK(r.reduced_inputs() == 0);
  CHECK(r.g0.front().cols() == 0);
}

TEST_CASE("singular weight with zero Riccati solution is regular") {
  // H = Q = 0 keeps P ≡ 0, so Γ0 = 0 lies in every range.
  const LQProblem p = irlq::testing::constant_problem(scalar(0), mat({{1, 1}}), scalar(0),
                                                      mat({{1, 0}, {0, 0}}), scalar(0), Vec::Ones(1), 200);
  const RiccatiSolution P = integrate_regular_riccati(p);
  const Classification c = classify(p, P);
  CHECK(c.verdict == Verdict::Regular);
  CHECK(c.m0 == 1);
}

TEST_CASE("classification is invariant under cost scaling") {
  for (double alpha : {0.1, 3.0, 50.0}) {
    const LQProblem p = irlq::testing::scaled_costs(fixture("E1"), alpha);
    const RiccatiSolution P = integrate_regular_riccati(p);
    const Classification c = classify(p, P);
    CHECK(c.verdict == Verdict::Irregular);
    CHECK(c.m0 == 1);
  }
}

TEST_CASE("rank variation of the control weight is unsupported") {
  LQProblem p = fixture("E1", 100);
  p.R = MatrixFunction::sampled({0.0, 0.5, 1.0}, {mat({{1, 0}, {0, 0}}), mat({{1, 0}, {0, 0}}),
                                                   mat({{1, 0}, {0, 1}})});
  const RiccatiSolution P = integrate_regular_riccati(p);
  CHECK_THROWS_AS(classify(p, P), UnsupportedRankVariation);
  CHECK_THROWS_AS(reduce(p, P), UnsupportedRankVariation);
}

TEST_CASE("reduce_node agrees with the grid reduction") {
  const LQProblem p = irlq::testing::two_state_singular(100);
  const RiccatiSolution P = integrate_regular_riccati(p);
  const ReducedSystem r = reduce(p, P);
  CHECK(r.m0 == 2);
  for (std::size_t k : {std::size_t{0}, std::size_t{37}, std::size_t{100}}) {
    const ReducedNode node = reduce_node(p.a(p.grid.node(k)), p.b(p.grid.node(k)),
                                         p.r(p.grid.node(k)), P[k]);
    CHECK((node.a0 - r.a0[k]).norm() <= 1e-14);
    CHECK((node.d0 - r.d0[k]).norm() <= 1e-14);
    CHECK((node.g0 * node.c0 - r.g0[k] * r.c0[k]).norm() <= 1e-14);
    const ReducedNode stored = r.node(k);
    CHECK((stored.b0 * stored.c0 - node.b0 * node.c0).norm() <= 1e-14);
  }
}

TEST_CASE("drift coefficients between nodes") {
  const LQProblem p = fixture("E1", 100);
  const ReducedSystem r = reduce(p, integrate_regular_riccati(p));
  for (double t : {0.0, 0.0049, 0.333, 0.995, 1.0}) {
    const DriftCoefficients d = r.drift_at(t);
    CHECK(std::abs(d.a0(0, 0) + 1.0 / (2.0 - t)) <= 1e-9);
    CHECK(d.d0(0, 0) == doctest::Approx(-1.0));
  }
}
