#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "irlq/linalg.hpp"

namespace irlq {

inline constexpr int kDefaultGridSteps = 1000;

/// Uniform grid t0 = s_0 < ... < s_steps = T.
class TimeGrid {
 public:
  TimeGrid() = default;
  /// Throws InputError unless T > t0 and steps > 0.
  TimeGrid(double t0, double t_final, int steps);

  double t0() const { return t0_; }
  double t_final() const { return t_final_; }
  int steps() const { return steps_; }
  std::size_t size() const { return static_cast<std::size_t>(steps_) + 1; }
  double step() const { return (t_final_ - t0_) / steps_; }

  /// The last node is exactly T.
  double node(std::size_t i) const;
  std::vector<double> nodes() const;

  bool contains(double t) const;
  /// Index of the cell [s_k, s_{k+1}] holding t, clamped to [0, steps − 1].
  std::size_t cell(double t) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double t0_ = 0.0;
  double t_final_ = 1.0;
  int steps_ = 1;
};

/// Time-varying matrix: a constant, or samples with linear interpolation.
class MatrixFunction {
 public:
  enum class Kind { Constant, Sampled };

  MatrixFunction() = default;
  static MatrixFunction constant(Mat value);
  /// Throws InputError unless times are strictly increasing and every sample
  /// has the same shape.
  static MatrixFunction sampled(std::vector<double> times, std::vector<Mat> values);

  Kind kind() const { return kind_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Mat>& values() const { return values_; }

  /// Constant: the value. Sampled: exact at sample times, linear in between.
  /// Throws InputError for sampled data outside the sampled span.
  Mat at(double t) const;

 private:
  Kind kind_ = Kind::Constant;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<double> times_;
  std::vector<Mat> values_;
};

/// ẋ = A x + B u, x(t0) = x0;  J = ∫ (xᵀQx + uᵀRu) dt + x(T)ᵀ H x(T).
struct LQProblem {
  int n = 0;
  int m = 0;
  TimeGrid grid;
  MatrixFunction A;
  MatrixFunction B;
  MatrixFunction Q;
  MatrixFunction R;
  Mat H;
  Vec x0;

  /// Matrix value at t; throws InputError when t is outside [t0, T].
  Mat a(double t) const;
  Mat b(double t) const;
  Mat q(double t) const;
  Mat r(double t) const;
};

/// evaluate(f, t) restricted to the problem horizon.
Mat evaluate(const MatrixFunction& f, double t);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Dimension, finiteness, symmetry (1e-10) and R ⪰ 0 checks at every node.
ValidationReport validate(const LQProblem& p);

/// Throws InputError listing every violation.
void require_valid(const LQProblem& p);

/// "E1" or "E2" on [0, 1]; throws InputError for other names.
LQProblem fixture(std::string_view name, int steps = kDefaultGridSteps, double x0 = 1.0);

}  // namespace irlq
