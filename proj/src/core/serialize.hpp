#pragma once

#include <string>

#include "json.hpp"

#include "core/model_selection.hpp"
#include "core/pls.hpp"
#include "core/types.hpp"

namespace spls {

// Parse failures surface as Error{parse} with the parser's message.
nlohmann::json parse_json_text(const std::string& text);

// Matrices serialize as {"rows", "cols", "data"} with row-major nested
// arrays so zero-column shapes survive the round trip.
nlohmann::json matrix_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json centering_json(const Centering& c);
Centering centering_from_json(const nlohmann::json& j);

nlohmann::json model_json(const PlsModel& model);
PlsModel model_from_json(const nlohmann::json& j);

nlohmann::json sparse_model_json(const SparsePlsModel& model);
SparsePlsModel sparse_model_from_json(const nlohmann::json& j);

nlohmann::json folds_json(const FoldAssignment& folds);
FoldAssignment folds_from_json(const nlohmann::json& j);

nlohmann::json cv_result_json(const CvResult& result);
CvResult cv_result_from_json(const nlohmann::json& j);

// String-level conveniences used by the shared-library boundary.
std::string model_to_text(const PlsModel& model, int indent = 2);
PlsModel model_from_text(const std::string& text);
std::string sparse_model_to_text(const SparsePlsModel& model, int indent = 2);
SparsePlsModel sparse_model_from_text(const std::string& text);
std::string cv_result_to_text(const CvResult& result, int indent = 2);
CvResult cv_result_from_text(const std::string& text);

}  // namespace spls
