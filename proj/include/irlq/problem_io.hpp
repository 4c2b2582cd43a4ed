#pragma once

#include <filesystem>
#include <json.hpp>

#include "irlq/model.hpp"

namespace irlq {

// Problem files are UTF-8 JSON:
//   {"n", "m", "t0", "T", "steps", "x0": [...],
//    "A"|"B"|"Q"|"R"|"H": {"constant": [[...]]}
//                       | {"sampled": {"times": [...], "values": [[[...]]]}}}
// Matrices are row-major nested arrays of finite doubles. H must be constant.
// Every parse failure throws InputError.

Mat matrix_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const Mat& m);

MatrixFunction matrix_function_from_json(const nlohmann::json& j);
nlohmann::json matrix_function_to_json(const MatrixFunction& f);

LQProblem problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const LQProblem& p);

LQProblem load_problem(const std::filesystem::path& path);
void save_problem(const LQProblem& p, const std::filesystem::path& path);

/// A bare nested array or {"constant": [[...]]}.
Mat load_matrix(const std::filesystem::path& path);

}  // namespace irlq
