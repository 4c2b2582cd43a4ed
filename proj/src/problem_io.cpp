#include "irlq/problem_io.hpp"

#include <cmath>
#include <fstream>

#include "irlq/errors.hpp"

namespace irlq {

using nlohmann::json;

namespace {

double finite_number(const json& j, const std::string& what) {
  if (!j.is_number()) throw InputError(what + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InputError(what + ": non-finite value");
  return v;
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw InputError(std::string("problem file: missing field '") + key + "'");
  return j.at(key);
}

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace

Mat matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw InputError("matrix: expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) throw InputError("matrix: rows must be arrays");
  const std::size_t cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw InputError("matrix: ragged rows");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          finite_number(j[r][c], "matrix entry");
  }
  return m;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixFunction matrix_function_from_json(const json& j) {
  if (j.is_array()) return MatrixFunction::constant(matrix_from_json(j));
  if (j.is_object() && j.contains("constant"))
    return MatrixFunction::constant(matrix_from_json(j.at("constant")));
  if (j.is_object() && j.contains("sampled")) {
    const json& s = j.at("sampled");
    const json& times = field(s, "times");
    const json& values = field(s, "values");
    if (!times.is_array() || !values.is_array() || times.size() != values.size())
      throw InputError("sampled matrix: times and values must be arrays of equal length");
    std::vector<double> ts;
    std::vector<Mat> vs;
    for (std::size_t i = 0; i < times.size(); ++i) {
      ts.push_back(finite_number(times[i], "sample time"));
      vs.push_back(matrix_from_json(values[i]));
    }
    return MatrixFunction::sampled(std::move(ts), std::move(vs));
  }
  throw InputError("matrix function: expected {\"constant\": ...} or {\"sampled\": ...}");
}

json matrix_function_to_json(const MatrixFunction& f) {
  if (f.kind() == MatrixFunction::Kind::Constant)
    return json{{"constant", matrix_to_json(f.at(0.0))}};
  json values = json::array();
  for (const Mat& v : f.values()) values.push_back(matrix_to_json(v));
  return json{{"sampled", {{"times", f.times()}, {"values", values}}}};
}

LQProblem problem_from_json(const json& j) {
  if (!j.is_object()) throw InputError("problem file: expected a JSON object");
  LQProblem p;
  auto integer = [&](const char* key) {
    const json& v = field(j, key);
    if (!v.is_number_integer()) throw InputError(std::string(key) + ": expected an integer");
    return v.get<int>();
  };
  p.n = integer("n");
  p.m = integer("m");
  const double t0 = finite_number(field(j, "t0"), "t0");
  const double t_final = finite_number(field(j, "T"), "T");
  p.grid = TimeGrid(t0, t_final, integer("steps"));

  const json& x0 = field(j, "x0");
  if (!x0.is_array()) throw InputError("x0: expected an array");
  p.x0.resize(static_cast<Eigen::Index>(x0.size()));
  for (std::size_t i = 0; i < x0.size(); ++i)
    p.x0(static_cast<Eigen::Index>(i)) = finite_number(x0[i], "x0 entry");

  p.A = matrix_function_from_json(field(j, "A"));
  p.B = matrix_function_from_json(field(j, "B"));
  p.Q = matrix_function_from_json(field(j, "Q"));
  p.R = matrix_function_from_json(field(j, "R"));
  const MatrixFunction h = matrix_function_from_json(field(j, "H"));
  if (h.kind() != MatrixFunction::Kind::Constant) throw InputError("H must be constant");
  p.H = h.at(t_final);
  return p;
}

json problem_to_json(const LQProblem& p) {
  json x0 = json::array();
  for (Eigen::Index i = 0; i < p.x0.size(); ++i) x0.push_back(p.x0(i));
  return json{{"n", p.n},
              {"m", p.m},
              {"t0", p.grid.t0()},
              {"T", p.grid.t_final()},
              {"steps", p.grid.steps()},
              {"x0", x0},
              {"A", matrix_function_to_json(p.A)},
              {"B", matrix_function_to_json(p.B)},
              {"Q", matrix_function_to_json(p.Q)},
              {"R", matrix_function_to_json(p.R)},
              {"H", {{"constant", matrix_to_json(p.H)}}}};
}

LQProblem load_problem(const std::filesystem::path& path) {
  return problem_from_json(parse_file(path));
}

void save_problem(const LQProblem& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << problem_to_json(p).dump(2) << "\n";
}

Mat load_matrix(const std::filesystem::path& path) {
  const json j = parse_file(path);
  if (j.is_object() && j.contains("constant")) return matrix_from_json(j.at("constant"));
  return matrix_from_json(j);
}

}  // namespace irlq
