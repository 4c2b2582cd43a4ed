#include "irlq/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "irlq/errors.hpp"

namespace irlq {

bool all_finite(const Mat& m) { return m.size() == 0 || m.allFinite(); }

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

double asymmetry(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

void normalize_column_signs(Mat& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index arg = 0;
    basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, j) < 0.0) basis.col(j) *= -1.0;
  }
}

RankedPinv pinv(const Mat& m, double rank_tol) {
  if (!all_finite(m)) throw InputError("pinv: matrix has non-finite entries");
  RankedPinv out;
  out.pinv = Mat::Zero(m.cols(), m.rows());
  if (m.size() == 0) return out;

  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.singular_values = svd.singularValues();
  const double sigma_max = out.singular_values.size() ? out.singular_values(0) : 0.0;
  const double threshold =
      rank_tol * sigma_max * static_cast<double>(std::max(m.rows(), m.cols()));
  if (sigma_max <= 0.0) return out;

  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i)
    if (out.singular_values(i) > threshold) ++rank;
  out.rank = rank;

  const Mat& u = svd.matrixU();
  const Mat& v = svd.matrixV();
  Vec inv = out.singular_values.head(rank).cwiseInverse();
  out.pinv = v.leftCols(rank) * inv.asDiagonal() * u.leftCols(rank).transpose();
  return out;
}

bool range_included(const Mat& n, const Mat& l, double tol, double rank_tol) {
  if (n.rows() != l.rows())
    throw InputError("range_included: row counts differ (" + std::to_string(n.rows()) +
                     " vs " + std::to_string(l.rows()) + ")");
  if (n.size() == 0) return true;
  const Mat l_pinv = pinv(l, rank_tol).pinv;
  const double gap = (l * (l_pinv * n) - n).norm();
  return gap <= tol * (1.0 + n.norm());
}

std::optional<Mat> solve_linear_matrix_eq(const Mat& l, const Mat& m, const Mat& n,
                                          double tol, const std::optional<Mat>& free_term,
                                          double rank_tol) {
  if (l.rows() != n.rows() || m.cols() != n.cols())
    throw InputError("solve_linear_matrix_eq: L X M = N shapes are not conformable");

  const Mat l_pinv = pinv(l, rank_tol).pinv;
  const Mat m_pinv = pinv(m, rank_tol).pinv;
  const double scale = tol * (1.0 + n.norm());

  // Solvable iff L L† N M† M = N.
  const Mat projected = l * l_pinv * n * m_pinv * m;
  if ((projected - n).norm() > scale) return std::nullopt;

  Mat x = l_pinv * n * m_pinv;
  if (free_term) {
    const Mat& y = *free_term;
    if (y.rows() != l.cols() || y.cols() != m.rows())
      throw InputError("solve_linear_matrix_eq: free term has the wrong shape");
    x += y - l_pinv * l * y * m * m_pinv;
  }
  if ((l * x * m - n).norm() > scale) return std::nullopt;
  return x;
}

ProjectorDecomposition projector_decomposition(const Mat& upsilon0, double rank_tol) {
  if (upsilon0.rows() != upsilon0.cols())
    throw InputError("projector_decomposition: matrix is not square");
  if (!all_finite(upsilon0))
    throw InputError("projector_decomposition: matrix has non-finite entries");
  const Eigen::Index m = upsilon0.rows();
  const double mag = m ? std::max(1.0, upsilon0.cwiseAbs().maxCoeff()) : 1.0;
  if (asymmetry(upsilon0) > 1e-9 * mag)
    throw InputError("projector_decomposition: matrix is not symmetric");
  if (m > 0) {
    const double min_eig = symmetric_eigen(symmetrize(upsilon0)).values(0);
    if (min_eig < -1e-9 * mag)
      throw InputError("projector_decomposition: matrix is not positive semidefinite");
  }

  ProjectorDecomposition out;
  const RankedPinv rp = pinv(upsilon0, rank_tol);
  out.m0 = rp.rank;
  out.upsilon0_pinv = rp.pinv;
  out.projector = Mat::Identity(m, m) - rp.pinv * upsilon0;

  // Eigenvalues of the symmetric idempotent projector are 0 (m0 times) and 1.
  const SymmetricEigen eig = symmetric_eigen(symmetrize(out.projector));
  Mat null_basis = eig.vectors.leftCols(out.m0);
  Mat range_basis = eig.vectors.rightCols(m - out.m0);
  normalize_column_signs(null_basis);
  normalize_column_signs(range_basis);

  out.t0.resize(m, m);
  out.t0.topRows(out.m0) = null_basis.transpose();
  out.t0.bottomRows(m - out.m0) = range_basis.transpose();
  out.upsilon_t0 = range_basis.transpose();
  out.g0 = out.t0.transpose().rightCols(m - out.m0);
  return out;
}

SymmetricEigen symmetric_eigen(const Mat& m) {
  if (m.rows() != m.cols()) throw InputError("symmetric_eigen: matrix is not square");
  SymmetricEigen out;
  if (m.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric_eigen: no convergence");
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  return out;
}

Vec symmetric_eigenvalues(const Mat& m) {
  if (m.rows() != m.cols()) throw InputError("symmetric_eigenvalues: matrix is not square");
  if (m.rows() == 0) return Vec();
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric_eigenvalues: no convergence");
  return es.eigenvalues();
}

}  // namespace irlq
