#include "irlq/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "irlq/errors.hpp"

namespace irlq {

namespace {

// Slack for floating round-off when comparing a time against a horizon.
double time_slack(double a, double b) { return 1e-12 * std::max(1.0, std::abs(b - a)); }

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TimeGrid::TimeGrid(double t0, double t_final, int steps)
    : t0_(t0), t_final_(t_final), steps_(steps) {
  if (!std::isfinite(t0) || !std::isfinite(t_final) || !(t_final > t0))
    throw InputError("time grid: need finite t0 < T");
  if (steps <= 0) throw InputError("time grid: steps must be positive");
}

double TimeGrid::node(std::size_t i) const {
  if (i >= size()) throw InputError("time grid: node index out of range");
  if (i == static_cast<std::size_t>(steps_)) return t_final_;
  return t0_ + static_cast<double>(i) * step();
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = node(i);
  return out;
}

bool TimeGrid::contains(double t) const {
  const double slack = time_slack(t0_, t_final_);
  return t >= t0_ - slack && t <= t_final_ + slack;
}

std::size_t TimeGrid::cell(double t) const {
  const double k = std::floor((t - t0_) / step());
  if (k <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(k), static_cast<std::size_t>(steps_ - 1));
}

MatrixFunction MatrixFunction::constant(Mat value) {
  MatrixFunction f;
  f.kind_ = Kind::Constant;
  f.rows_ = value.rows();
  f.cols_ = value.cols();
  f.values_.push_back(std::move(value));
  return f;
}

MatrixFunction MatrixFunction::sampled(std::vector<double> times, std::vector<Mat> values) {
  if (times.size() != values.size() || times.size() < 2)
    throw InputError("sampled matrix: need at least two (time, matrix) samples");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw InputError("sampled matrix: times must be strictly increasing");
  for (const Mat& v : values)
    if (v.rows() != values[0].rows() || v.cols() != values[0].cols())
      throw InputError("sampled matrix: samples differ in shape");
  MatrixFunction f;
  f.kind_ = Kind::Sampled;
  f.rows_ = values[0].rows();
  f.cols_ = values[0].cols();
  f.times_ = std::move(times);
  f.values_ = std::move(values);
  return f;
}

Mat MatrixFunction::at(double t) const {
  if (values_.empty()) return Mat(rows_, cols_);
  if (kind_ == Kind::Constant) return values_.front();

  const double lo = times_.front();
  const double hi = times_.back();
  const double slack = time_slack(lo, hi);
  if (!(t >= lo - slack && t <= hi + slack))
    throw InputError("sampled matrix: t = " + std::to_string(t) + " outside sampled span");

  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return values_.front();
  if (it == times_.end()) return values_.back();
  const std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
  if (times_[k] == t) return values_[k];
  const double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
  return (1.0 - w) * values_[k] + w * values_[k + 1];
}

Mat evaluate(const MatrixFunction& f, double t) { return f.at(t); }

namespace {

Mat checked_at(const LQProblem& p, const MatrixFunction& f, double t, const char* name) {
  if (!p.grid.contains(t))
    throw InputError(std::string(name) + "(t): t = " + std::to_string(t) + " outside horizon");
  return f.at(t);
}

}  // namespace

Mat LQProblem::a(double t) const { return checked_at(*this, A, t, "A"); }
Mat LQProblem::b(double t) const { return checked_at(*this, B, t, "B"); }
Mat LQProblem::q(double t) const { return checked_at(*this, Q, t, "Q"); }
Mat LQProblem::r(double t) const { return checked_at(*this, R, t, "R"); }

ValidationReport validate(const LQProblem& p) {
  ValidationReport report;
  auto add = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

  if (p.n <= 0) add("n must be positive");
  if (p.m <= 0) add("m must be positive");

  auto check_shape = [&](const char* name, Eigen::Index r, Eigen::Index c, Eigen::Index er,
                         Eigen::Index ec) {
    if (r != er || c != ec) {
      std::ostringstream os;
      os << "dimension mismatch: " << name << " is " << r << "x" << c << ", expected " << er
         << "x" << ec;
      add(os.str());
      return false;
    }
    return true;
  };
  bool shapes = true;
  shapes &= check_shape("A", p.A.rows(), p.A.cols(), p.n, p.n);
  shapes &= check_shape("B", p.B.rows(), p.B.cols(), p.n, p.m);
  shapes &= check_shape("Q", p.Q.rows(), p.Q.cols(), p.n, p.n);
  shapes &= check_shape("R", p.R.rows(), p.R.cols(), p.m, p.m);
  shapes &= check_shape("H", p.H.rows(), p.H.cols(), p.n, p.n);
  shapes &= check_shape("x0", p.x0.rows(), p.x0.cols(), p.n, 1);
  if (!shapes) return report;

  if (!all_finite(p.H)) add("H has non-finite entries");
  if (!all_finite(p.x0)) add("x0 has non-finite entries");
  if (asymmetry(p.H) > 1e-10 * std::max(1.0, max_abs(p.H))) add("H not symmetric");

  for (const auto* f : {&p.A, &p.B, &p.Q, &p.R}) {
    if (f->kind() != MatrixFunction::Kind::Sampled) continue;
    const double slack = time_slack(p.grid.t0(), p.grid.t_final());
    if (f->times().front() > p.grid.t0() + slack || f->times().back() < p.grid.t_final() - slack) {
      add("sampled data does not span the horizon");
      return report;
    }
  }

  bool q_sym = true, r_sym = true, r_psd = true, finite = true;
  for (double t : p.grid.nodes()) {
    const Mat a = p.A.at(t), b = p.B.at(t), q = p.Q.at(t), r = p.R.at(t);
    if (!all_finite(a) || !all_finite(b) || !all_finite(q) || !all_finite(r)) {
      finite = false;
      continue;
    }
    if (q_sym && asymmetry(q) > 1e-10 * std::max(1.0, max_abs(q))) q_sym = false;
    if (r_sym && asymmetry(r) > 1e-10 * std::max(1.0, max_abs(r))) r_sym = false;
    if (r_psd && symmetric_eigen(symmetrize(r)).values(0) < -1e-10 * std::max(1.0, max_abs(r)))
      r_psd = false;
  }
  if (!finite) add("problem data has non-finite entries");
  if (!q_sym) add("Q not symmetric");
  if (!r_sym) add("R not symmetric");
  if (!r_psd) add("R not PSD");
  return report;
}

void require_valid(const LQProblem& p) {
  const ValidationReport report = validate(p);
  if (report.ok()) return;
  std::string msg = "invalid problem:";
  for (const auto& v : report.violations) msg += " " + v + ";";
  throw InputError(msg);
}

LQProblem fixture(std::string_view name, int steps, double x0) {
  if (name != "E1" && name != "E2") throw InputError("unknown fixture '" + std::string(name) + "'");
  const bool e2 = name == "E2";
  LQProblem p;
  p.n = 1;
  p.m = 2;
  p.grid = TimeGrid(0.0, 1.0, steps);
  p.A = MatrixFunction::constant(Mat::Zero(1, 1));
  p.B = MatrixFunction::constant((Mat(1, 2) << 1.0, 1.0).finished());
  p.Q = MatrixFunction::constant(Mat::Constant(1, 1, e2 ? 1.0 : 0.0));
  p.R = MatrixFunction::constant((Mat(2, 2) << 1.0, 0.0, 0.0, 0.0).finished());
  p.H = Mat::Constant(1, 1, e2 ? 2.0 : 1.0);
  p.x0 = Vec::Constant(1, x0);
  return p;
}

}  // namespace irlq
