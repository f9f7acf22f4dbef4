#include "core/serialize.hpp"

#include <string>
#include <vector>

#include "core/error.hpp"

namespace spls {

namespace {

using nlohmann::json;

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) fail(ErrorCode::parse, "expected a numeric array");
  Vector v(static_cast<Index>(j.size()));
  Index at = 0;
  for (const auto& x : j) v[at++] = x.get<double>();
  return v;
}

template <typename Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string(what) + ": " + e.what());
  }
}

}  // namespace

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string("invalid json: ") + e.what());
  }
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const json& j) {
  return guarded("matrix", [&] {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    if (rows < 0 || cols < 0) fail(ErrorCode::parse, "matrix: negative shape");
    const json& data = j.at("data");
    if (static_cast<Index>(data.size()) != rows)
      fail(ErrorCode::parse, "matrix: row count does not match shape");
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      const json& row = data.at(static_cast<size_t>(r));
      if (static_cast<Index>(row.size()) != cols)
        fail(ErrorCode::parse, "matrix: column count does not match shape");
      for (Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<size_t>(c)).get<double>();
    }
    return m;
  });
}

json centering_json(const Centering& c) {
  json j{{"x_mean", vector_json(c.x_mean)}, {"y_mean", vector_json(c.y_mean)}};
  j["x_scale"] = c.x_scale ? vector_json(*c.x_scale) : json();
  return j;
}

Centering centering_from_json(const json& j) {
  return guarded("centering", [&] {
    Centering c;
    c.x_mean = vector_from_json(j.at("x_mean"));
    c.y_mean = vector_from_json(j.at("y_mean"));
    if (j.contains("x_scale") && !j.at("x_scale").is_null())
      c.x_scale = vector_from_json(j.at("x_scale"));
    return c;
  });
}

json model_json(const PlsModel& model) {
  json j{{"algorithm", model.algorithm == PlsAlgorithm::nipals ? "nipals" : "simpls"},
         {"k", model.K},
         {"truncated", model.truncated},
         {"w", matrix_json(model.W)},
         {"t", matrix_json(model.T)},
         {"p", matrix_json(model.P)},
         {"q", matrix_json(model.Q)},
         {"beta", matrix_json(model.beta)},
         {"centering", centering_json(model.centering)}};
  if (model.nipals) {
    j["internals"] = json{{"r", matrix_json(model.nipals->R)},
                          {"c", matrix_json(model.nipals->C)},
                          {"b", matrix_json(model.nipals->B)},
                          {"v", matrix_json(model.nipals->V)}};
  } else {
    j["internals"] = json();
  }
  return j;
}

PlsModel model_from_json(const json& j) {
  return guarded("model", [&] {
    PlsModel m;
    const std::string algo = j.at("algorithm").get<std::string>();
    if (algo == "nipals")
      m.algorithm = PlsAlgorithm::nipals;
    else if (algo == "simpls")
      m.algorithm = PlsAlgorithm::simpls;
    else
      fail(ErrorCode::parse, "model: unknown algorithm '" + algo + "'");
    m.K = j.at("k").get<int>();
    m.truncated = j.at("truncated").get<bool>();
    m.W = matrix_from_json(j.at("w"));
    m.T = matrix_from_json(j.at("t"));
    m.P = matrix_from_json(j.at("p"));
    m.Q = matrix_from_json(j.at("q"));
    m.beta = matrix_from_json(j.at("beta"));
    m.centering = centering_from_json(j.at("centering"));
    if (j.contains("internals") && !j.at("internals").is_null()) {
      NipalsInternals in;
      in.R = matrix_from_json(j.at("internals").at("r"));
      in.C = matrix_from_json(j.at("internals").at("c"));
      in.B = matrix_from_json(j.at("internals").at("b"));
      in.V = matrix_from_json(j.at("internals").at("v"));
      m.nipals = std::move(in);
    }
    return m;
  });
}

json sparse_model_json(const SparsePlsModel& model) {
  json sel = json::array();
  for (const Index i : model.selected) sel.push_back(i);
  return json{{"model", model_json(model.model)},
              {"sparse_weights", matrix_json(model.sparse_weights)},
              {"selected", std::move(sel)},
              {"lambda", model.lambda},
              {"requested_k", model.requested_k},
              {"diagnostics",
               json{{"iterations", model.diagnostics.iterations},
                    {"final_residual", model.diagnostics.final_residual},
                    {"converged", model.diagnostics.converged},
                    {"mu_final", model.diagnostics.mu_final},
                    {"init_truncated", model.diagnostics.init_truncated},
                    {"total_shrinkage", model.diagnostics.total_shrinkage}}}};
}

SparsePlsModel sparse_model_from_json(const json& j) {
  return guarded("sparse model", [&] {
    SparsePlsModel m;
    m.model = model_from_json(j.at("model"));
    m.sparse_weights = matrix_from_json(j.at("sparse_weights"));
    for (const auto& x : j.at("selected")) m.selected.push_back(x.get<Index>());
    m.lambda = j.at("lambda").get<double>();
    m.requested_k = j.at("requested_k").get<int>();
    const json& d = j.at("diagnostics");
    m.diagnostics.iterations = d.at("iterations").get<int>();
    m.diagnostics.final_residual = d.at("final_residual").get<double>();
    m.diagnostics.converged = d.at("converged").get<bool>();
    m.diagnostics.mu_final = d.at("mu_final").get<double>();
    m.diagnostics.init_truncated = d.at("init_truncated").get<bool>();
    m.diagnostics.total_shrinkage = d.at("total_shrinkage").get<bool>();
    return m;
  });
}

json folds_json(const FoldAssignment& folds) {
  json f = json::array();
  for (const int x : folds.fold_of) f.push_back(x);
  return json{{"k", folds.k}, {"seed", folds.seed}, {"fold_of", std::move(f)}};
}

FoldAssignment folds_from_json(const json& j) {
  return guarded("folds", [&] {
    FoldAssignment f;
    f.k = j.at("k").get<int>();
    f.seed = j.at("seed").get<uint64_t>();
    for (const auto& x : j.at("fold_of")) f.fold_of.push_back(x.get<int>());
    return f;
  });
}

json cv_result_json(const CvResult& result) {
  json folds = json::array();
  for (const Matrix& m : result.fold_mse) folds.push_back(matrix_json(m));
  return json{{"best_k", result.best_k},
              {"best_lambda", result.best_lambda},
              {"k_grid", result.k_grid},
              {"lambda_grid", result.lambda_grid},
              {"mean_mse", matrix_json(result.mean_mse)},
              {"fold_mse", std::move(folds)},
              {"folds", folds_json(result.folds)}};
}

CvResult cv_result_from_json(const json& j) {
  return guarded("cv result", [&] {
    CvResult r;
    r.best_k = j.at("best_k").get<int>();
    r.best_lambda = j.at("best_lambda").get<double>();
    r.k_grid = j.at("k_grid").get<std::vector<int>>();
    r.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    r.mean_mse = matrix_from_json(j.at("mean_mse"));
    for (const auto& m : j.at("fold_mse")) r.fold_mse.push_back(matrix_from_json(m));
    r.folds = folds_from_json(j.at("folds"));
    return r;
  });
}

std::string model_to_text(const PlsModel& model, int indent) {
  return model_json(model).dump(indent);
}

PlsModel model_from_text(const std::string& text) { return model_from_json(parse_json_text(text)); }

std::string sparse_model_to_text(const SparsePlsModel& model, int indent) {
  return sparse_model_json(model).dump(indent);
}

SparsePlsModel sparse_model_from_text(const std::string& text) {
  return sparse_model_from_json(parse_json_text(text));
}

std::string cv_result_to_text(const CvResult& result, int indent) {
  return cv_result_json(result).dump(indent);
}

CvResult cv_result_from_text(const std::string& text) {
  return cv_result_from_json(parse_json_text(text));
}

}  // namespace spls
