#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "irlq/integrate.hpp"
#include "irlq/reduce.hpp"

namespace irlq {

inline constexpr double kDefaultGammaTol = 1e-6;
inline constexpr double kDefaultOverlapThreshold = 0.9;

/// Second-layer data: P1, Γ1 = C0 + B0ᵀP1 and the verdict Γ1 ≡ 0.
/// Υ1 is identically zero and has no stored representation.
struct LayerTwoSolution {
  Mat p1_terminal;
  RiccatiSolution p1;
  std::vector<double> gamma1_norms;  // ‖Γ1(t)‖_F per node
  double gamma1_max = 0.0;
  bool solvable = false;
};

enum class ControllerKind { RegularFeedback, IrregularOpenLoop, IrregularClosedLoop };

std::string_view to_string(ControllerKind kind);

/// Full input as a function of time and state:
///
///   u(t, x) = (feedback(t) + singular_feedback(t) / (t − T)) x + feedforward(t).
///
/// All pieces are m-dimensional (basis-dependent reduced quantities are
/// already multiplied through by G0), so they can be interpolated between
/// nodes. A law with a singular part cannot be evaluated at t = T; the
/// simulator closes the last cell by projecting onto ker P1(T) instead.
struct ControlLaw {
  TimeGrid grid;
  std::vector<Mat> feedback;
  std::vector<Mat> singular_feedback;  // empty when the gain is bounded
  std::vector<Vec> feedforward;        // empty for pure feedback
  Mat terminal_projector;              // I − P1(T)†P1(T)

  bool singular() const { return !singular_feedback.empty(); }
  Vec operator()(double t, const Vec& x) const;
};

struct Controller {
  ControllerKind kind = ControllerKind::RegularFeedback;
  ControlLaw law;
  MatrixGridFunction riccati;     // P, for the costate p = Px + Θ
  MatrixGridFunction theta_gain;  // Θ = theta_gain · x (P1, or zero when regular)
  Mat p1_terminal;                // zero when regular

  // RegularFeedback: u = K0 x.
  MatrixGridFunction k0;

  // IrregularOpenLoop: u1(t) = C0(t) P2ᵀ(t0, t) ζ.
  MatrixGridFunction u1_profile;
  Vec zeta;
  Mat gramian;

  // IrregularClosedLoop: u1 = K1 x on nodes t0 … T − h (terminal excluded).
  std::vector<Mat> k1;
  std::string closed_loop_path;  // "nonsingular" or "singular"
};

struct NotOpenLoopSolvable {
  double range_gap = 0.0;  // ‖G1 G1† P1(t0) − P1(t0)‖_F
};

struct NoGain {
  std::size_t node = 0;
  double time = 0.0;
  std::string reason;
};

struct Unsupported {
  std::string reason;
};

using OpenLoopOutcome = std::variant<Controller, NotOpenLoopSolvable>;
using ClosedLoopOutcome = std::variant<Controller, NoGain, Unsupported>;

/// u = −Υ0†Γ0 x with z = 0. Throws MisuseError on an irregular classification.
Controller solve_regular(const LQProblem& p, const RiccatiSolution& P, const Classification& c,
                         double rank_tol = kDefaultRankTol);

/// Arbitrary state feedback u = K(t) x, reported as RegularFeedback.
/// Used for probing suboptimal controls.
Controller feedback_controller(const LQProblem& p, const RiccatiSolution& P,
                               std::vector<Mat> gains);

/// Minimal-norm symmetric X with B0ᵀ(T) X = −C0(T), or nullopt.
std::optional<Mat> select_p1_terminal(const ReducedSystem& reduced,
                                      double tol = kDefaultSolveTol,
                                      double rank_tol = kDefaultRankTol);

/// Γ1 per node; solvable iff max ‖Γ1‖ <= tol_gamma (1 + max ‖P1‖).
LayerTwoSolution check_solvability(const ReducedSystem& reduced, const RiccatiSolution& P1,
                                   double tol_gamma = kDefaultGammaTol);

/// Gramian test Range(P1(t0)) ⊆ Range(G1[t0, T]) and, when it passes,
/// u1(t) = C0(t) P2ᵀ(t0, t) G1† P1(t0) x0.
OpenLoopOutcome open_loop(const LQProblem& p, const ReducedSystem& reduced,
                          const LayerTwoSolution& l2, double tol_range = kDefaultRangeTol,
                          double rank_tol = kDefaultRankTol);

/// Solves B0 K1 = I/(t − T) − A0 − D0 P1 node-wise. Requires P1 invertible
/// on [t0, T); returns Unsupported otherwise.
ClosedLoopOutcome closed_loop_nonsingular(const ReducedSystem& reduced,
                                          const LayerTwoSolution& l2,
                                          double tol = kDefaultSolveTol,
                                          double rank_tol = kDefaultRankTol);

/// Singular P1 of constant rank r on [t0, T). With 𝒯r(t) a smoothly tracked
/// orthonormal basis of Range(P1(t)), solves the first block row
///   𝒯̇rᵀ + 𝒯rᵀ(A0 + D0P1) + 𝒯rᵀB0 K = 𝒯rᵀ / (t − T)
/// so that y1 = 𝒯rᵀx obeys ẏ1 = y1 / (t − T). Delegates to the nonsingular
/// path when r = n.
ClosedLoopOutcome closed_loop_singular(const ReducedSystem& reduced, const LayerTwoSolution& l2,
                                       double tol = kDefaultSolveTol,
                                       double rank_tol = kDefaultRankTol,
                                       double overlap_threshold = kDefaultOverlapThreshold);

using ControlFunction = std::function<Vec(double, const Vec&)>;

/// u(t, x) = −Υ0†(Γ0 x + Bᵀ P1 x) + G0 u1(t, x), evaluated at grid nodes
/// (throws InputError for off-grid t). u1_at returns the reduced input in
/// the node's own G0 basis.
ControlFunction assemble_full_control(const ReducedSystem& reduced, const LayerTwoSolution& l2,
                                      ControlFunction u1_at);

}  // namespace irlq
