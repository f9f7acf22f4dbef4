#include "sparsepls.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/model_selection.hpp"
#include "core/serialize.hpp"
#include "core/simgen.hpp"
#include "core/types.hpp"
#include "core/version.hpp"

struct spls_dataset {
  spls::Dataset data;
};

struct spls_model {
  spls::SparsePlsModel model;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

spls_status status_of(spls::ErrorCode code) {
  switch (code) {
    case spls::ErrorCode::invalid_argument: return SPLS_ERR_INVALID_ARGUMENT;
    case spls::ErrorCode::parse: return SPLS_ERR_PARSE;
    case spls::ErrorCode::numeric: return SPLS_ERR_NUMERIC;
    case spls::ErrorCode::io: return SPLS_ERR_IO;
  }
  return SPLS_ERR_INTERNAL;
}

template <typename Fn>
spls_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SPLS_OK;
  } catch (const spls::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SPLS_ERR_INTERNAL;
  }
}

spls_status invalid(const char* msg) {
  g_last_error = msg;
  return SPLS_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Options objects reuse the experiment-config field layout, so a subset
// parse picks up scale/admm/l1 with defaults for everything absent.
spls::MethodConfig parse_method_config(const std::string& method, const char* options_json) {
  spls::MethodConfig mc;
  mc.method = spls::method_from_string(method);
  if (options_json != nullptr && *options_json != '\0') {
    const spls::ExperimentConfig c = spls::config_from_json(spls::parse_json_text(options_json));
    mc.scale = c.scale;
    mc.admm = c.admm;
    mc.l1 = c.l1;
  }
  return mc;
}

}  // namespace

extern "C" {

const char* spls_version(void) { return spls::kVersion; }

const char* spls_last_error(void) { return g_last_error.c_str(); }

void spls_string_free(char* text) { delete[] text; }

spls_status spls_dataset_from_csv(const char* x_path, const char* y_path, int has_header,
                                  const char* subjects_path_or_null, spls_dataset** out) {
  if (!x_path || !y_path || !out) return invalid("null argument");
  return guarded([&] {
    *out = new spls_dataset{spls::load_dataset_csv(
        x_path, y_path, has_header != 0, subjects_path_or_null ? subjects_path_or_null : "")};
  });
}

spls_status spls_dataset_from_dense(const double* x, const double* y, int64_t n, int64_t p,
                                    int64_t q, spls_dataset** out) {
  if (!x || !y || !out) return invalid("null argument");
  if (n < 1 || p < 1 || q < 1) return invalid("dimensions must be positive");
  return guarded([&] {
    spls::Dataset d;
    d.X = RowMajorMap(x, n, p);
    d.Y = RowMajorMap(y, n, q);
    spls::validate(d);
    *out = new spls_dataset{std::move(d)};
  });
}

spls_status spls_dataset_simulate(int model_id, int64_t n, int64_t p, uint64_t seed,
                                  spls_dataset** out) {
  if (!out) return invalid("null argument");
  return guarded([&] {
    spls::SimModelSpec spec;
    spec.model_id = model_id;
    spec.n = n;
    spec.p = p;
    spec.seed = seed;
    *out = new spls_dataset{spls::generate(spec)};
  });
}

spls_status spls_dataset_dims(const spls_dataset* data, int64_t* n, int64_t* p, int64_t* q) {
  if (!data) return invalid("null dataset");
  if (n) *n = data->data.n();
  if (p) *p = data->data.p();
  if (q) *q = data->data.q();
  g_last_error.clear();
  return SPLS_OK;
}

spls_status spls_dataset_save_csv(const spls_dataset* data, const char* x_path_or_null,
                                  const char* y_path_or_null, const char* beta_path_or_null) {
  if (!data) return invalid("null dataset");
  return guarded([&] {
    if (x_path_or_null) spls::save_csv(data->data.X, data->data.x_names, x_path_or_null);
    if (y_path_or_null) spls::save_csv(data->data.Y, data->data.y_names, y_path_or_null);
    if (beta_path_or_null) {
      if (!data->data.beta_true)
        spls::fail(spls::ErrorCode::invalid_argument, "dataset has no generating coefficients");
      const std::vector<std::string> names =
          static_cast<spls::Index>(data->data.y_names.size()) == data->data.beta_true->cols()
              ? data->data.y_names
              : std::vector<std::string>{};
      spls::save_csv(*data->data.beta_true, names, beta_path_or_null);
    }
  });
}

void spls_dataset_free(spls_dataset* data) { delete data; }

spls_status spls_fit(const spls_dataset* data, const char* method, int k, double lambda,
                     const char* options_json_or_null, spls_model** out) {
  if (!data || !method || !out) return invalid("null argument");
  return guarded([&] {
    const spls::MethodConfig mc = parse_method_config(method, options_json_or_null);
    *out = new spls_model{spls::fit_method(data->data.X, data->data.Y, k, lambda, mc)};
  });
}

spls_status spls_model_dims(const spls_model* model, int64_t* p, int64_t* q, int* k) {
  if (!model) return invalid("null model");
  if (p) *p = model->model.model.beta.rows();
  if (q) *q = model->model.model.beta.cols();
  if (k) *k = model->model.model.K;
  g_last_error.clear();
  return SPLS_OK;
}

spls_status spls_model_selected_count(const spls_model* model, int64_t* count) {
  if (!model || !count) return invalid("null argument");
  *count = static_cast<int64_t>(model->model.selected.size());
  g_last_error.clear();
  return SPLS_OK;
}

spls_status spls_predict(const spls_model* model, const double* x, int64_t n, int64_t p,
                         double* y_out) {
  if (!model || !x || !y_out) return invalid("null argument");
  if (n < 1) return invalid("need at least one row");
  if (p != model->model.model.beta.rows()) return invalid("predictor count mismatch");
  return guarded([&] {
    const spls::Matrix yhat = spls::predict(model->model, spls::Matrix(RowMajorMap(x, n, p)));
    for (int64_t i = 0; i < n; ++i)
      for (spls::Index j = 0; j < yhat.cols(); ++j)
        y_out[i * yhat.cols() + j] = yhat(static_cast<spls::Index>(i), j);
  });
}

spls_status spls_model_to_json(const spls_model* model, char** out_text) {
  if (!model || !out_text) return invalid("null argument");
  return guarded([&] { *out_text = dup_string(spls::sparse_model_to_text(model->model)); });
}

spls_status spls_model_from_json(const char* text, spls_model** out) {
  if (!text || !out) return invalid("null argument");
  return guarded([&] { *out = new spls_model{spls::sparse_model_from_text(text)}; });
}

void spls_model_free(spls_model* model) { delete model; }

spls_status spls_cross_validate(const spls_dataset* data, const char* config_json,
                                char** out_json) {
  if (!data || !config_json || !out_json) return invalid("null argument");
  return guarded([&] {
    const json j = spls::parse_json_text(config_json);
    try {
      if (!j.contains("method"))
        spls::fail(spls::ErrorCode::parse, "config: method is required");
      const spls::ExperimentConfig shared = spls::config_from_json(j);
      spls::MethodConfig mc;
      mc.method = spls::method_from_string(j.at("method").get<std::string>());
      mc.scale = shared.scale;
      mc.admm = shared.admm;
      mc.l1 = shared.l1;
      const int max_k = *std::max_element(shared.k_grid.begin(), shared.k_grid.end());
      const std::vector<double> grid =
          shared.lambda_grid.empty()
              ? spls::default_lambda_grid(data->data.X, data->data.Y, mc, max_k,
                                          shared.lambda_points)
              : shared.lambda_grid;
      const spls::CvResult cv =
          spls::cross_validate(data->data, mc, shared.k_grid, grid, shared.folds, shared.seed,
                               shared.mse_mode, shared.threads);
      *out_json = dup_string(spls::cv_result_to_text(cv));
    } catch (const json::exception& e) {
      spls::fail(spls::ErrorCode::parse, std::string("config: ") + e.what());
    }
  });
}

spls_status spls_experiment_run(const char* config_json, char** out_report_json,
                                char** out_table) {
  if (!config_json || !out_report_json) return invalid("null argument");
  return guarded([&] {
    const spls::ExperimentConfig config =
        spls::config_from_json(spls::parse_json_text(config_json));
    const spls::ExperimentReport report = spls::run_experiment(config);
    *out_report_json = dup_string(spls::report_json(report).dump(2));
    if (out_table) *out_table = dup_string(spls::report_table(report));
  });
}

spls_status spls_selection_frequency_run(const char* config_json, char** out_csv) {
  if (!config_json || !out_csv) return invalid("null argument");
  return guarded([&] {
    const spls::ExperimentConfig config =
        spls::config_from_json(spls::parse_json_text(config_json));
    const spls::ExperimentReport report = spls::run_experiment(config);
    const spls::CsvTable table = spls::selection_frequency(report);
    *out_csv = dup_string(spls::csv_text(table.values, table.names));
  });
}

}  // extern "C"
