#pragma once

#include <Eigen/Dense>
#include <optional>

namespace irlq {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Relative rank threshold: singular values below
/// rank_tol * sigma_max * max(rows, cols) are treated as zero.
inline constexpr double kDefaultRankTol = 1e-9;
inline constexpr double kDefaultRangeTol = 1e-8;
inline constexpr double kDefaultSolveTol = 1e-8;

struct RankedPinv {
  Mat pinv;
  Eigen::Index rank = 0;
  Vec singular_values;  // descending
};

/// Moore-Penrose inverse by SVD. Throws InputError on non-finite entries.
RankedPinv pinv(const Mat& m, double rank_tol = kDefaultRankTol);

/// Range(n) ⊆ Range(l), tested as ‖L L† N − N‖_F <= tol (1 + ‖N‖_F).
bool range_included(const Mat& n, const Mat& l, double tol = kDefaultRangeTol,
                    double rank_tol = kDefaultRankTol);

/// Solves L X M = N. When L L† N M† M = N (within tol), returns
///   X = L† N M† + Y − L† L Y M M†,
/// with Y = 0 unless a free term is supplied. Returns nullopt when the
/// equation has no solution.
std::optional<Mat> solve_linear_matrix_eq(const Mat& l, const Mat& m, const Mat& n,
                                          double tol = kDefaultSolveTol,
                                          const std::optional<Mat>& free_term = std::nullopt,
                                          double rank_tol = kDefaultRankTol);

/// Orthogonal row transformation of the projector I − Υ0†Υ0.
///
/// The first m0 rows of `t0` span Range(Υ0) (the null space of the projector);
/// the remaining m − m0 rows are `upsilon_t0`, an orthonormal basis of the
/// projector's range. Hence t0 (I − Υ0†Υ0) = [0; upsilon_t0] and, with
/// t0⁻¹ = t0ᵀ, `g0` is the last m − m0 columns of t0ᵀ.
struct ProjectorDecomposition {
  Mat t0;
  Mat upsilon_t0;  // (m − m0) × m
  Mat g0;          // m × (m − m0)
  Eigen::Index m0 = 0;
  Mat projector;   // I − Υ0†Υ0
  Mat upsilon0_pinv;
};

/// Throws InputError when upsilon0 is not symmetric or not PSD.
ProjectorDecomposition projector_decomposition(const Mat& upsilon0,
                                               double rank_tol = kDefaultRankTol);

// Small helpers shared across modules.

bool all_finite(const Mat& m);
Mat symmetrize(const Mat& m);
double asymmetry(const Mat& m);

/// Flips each column so its largest-magnitude entry is positive.
void normalize_column_signs(Mat& basis);

/// Dense symmetric eigendecomposition, ascending eigenvalues.
struct SymmetricEigen {
  Vec values;
  Mat vectors;
};
SymmetricEigen symmetric_eigen(const Mat& m);

/// Eigenvalues only; several times cheaper than the full decomposition for
/// large matrices since no eigenvectors are accumulated.
Vec symmetric_eigenvalues(const Mat& m);

}  // namespace irlq
