#include "core/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>

#include "core/error.hpp"
#include "core/random.hpp"
#include "core/threading.hpp"
#include "core/version.hpp"

namespace spls {

namespace {

using nlohmann::json;

// Per-trial seed tags; the low bits keep the streams of one trial apart.
constexpr uint64_t kTagTrain = 1, kTagTest = 2, kTagFolds = 3, kTagSplit = 4;

uint64_t trial_seed(uint64_t seed, int trial, uint64_t tag) {
  return mix_seed(seed, (static_cast<uint64_t>(trial) << 3) | tag);
}

Matrix take_rows(const Matrix& A, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), A.cols());
  for (Index i = 0; i < out.rows(); ++i) out.row(i) = A.row(rows[static_cast<size_t>(i)]);
  return out;
}

Dataset subset(const Dataset& full, const std::vector<Index>& rows) {
  Dataset out;
  out.X = take_rows(full.X, rows);
  out.Y = take_rows(full.Y, rows);
  if (!full.subject_ids.empty()) {
    out.subject_ids.reserve(rows.size());
    for (const Index r : rows) out.subject_ids.push_back(full.subject_ids[static_cast<size_t>(r)]);
  }
  out.beta_true = full.beta_true;
  out.x_names = full.x_names;
  out.y_names = full.y_names;
  return out;
}

MethodConfig method_config(const ExperimentConfig& c, Method m) {
  MethodConfig mc;
  mc.method = m;
  mc.scale = c.scale;
  mc.admm = c.admm;
  mc.l1 = c.l1;
  return mc;
}

double metric_of(const TrialRow& row, const std::string& metric) {
  if (metric == "test_mse") return row.test_mse;
  if (metric == "selected") return static_cast<double>(row.selected_count);
  return static_cast<double>(row.components);
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
  if (config.sim.has_value() == config.csv.has_value())
    fail(ErrorCode::invalid_argument, "exactly one data source (sim or csv) must be set");
  if (config.csv) {
    const CsvSource& s = *config.csv;
    for (const std::string& path : {s.x_path, s.y_path, s.subjects_path}) {
      if (path.empty()) continue;
      if (!std::filesystem::exists(path))
        fail(ErrorCode::invalid_argument, "file not found: " + path);
    }
    if (s.x_path.empty() || s.y_path.empty())
      fail(ErrorCode::invalid_argument, "csv source needs both predictor and response paths");
    if (!(s.test_fraction > 0.0 && s.test_fraction < 1.0))
      fail(ErrorCode::invalid_argument, "test fraction must lie strictly inside (0, 1)");
  }
  if (config.methods.empty()) fail(ErrorCode::invalid_argument, "method list is empty");
  std::set<Method> seen(config.methods.begin(), config.methods.end());
  if (seen.size() != config.methods.size())
    fail(ErrorCode::invalid_argument, "method list contains duplicates");
  if (config.trials < 1) fail(ErrorCode::invalid_argument, "trials must be at least 1");
  if (config.folds < 2) fail(ErrorCode::invalid_argument, "folds must be at least 2");
  if (config.k_grid.empty()) fail(ErrorCode::invalid_argument, "component grid is empty");
  for (const int k : config.k_grid)
    if (k < 1) fail(ErrorCode::invalid_argument, "component grid values must be positive");
  for (const double l : config.lambda_grid)
    if (l < 0.0) fail(ErrorCode::invalid_argument, "penalty grid values must be nonnegative");
  if (config.lambda_points < 1)
    fail(ErrorCode::invalid_argument, "default penalty grid needs at least one point");
  if (config.threads < 1) fail(ErrorCode::invalid_argument, "threads must be at least 1");
}

json config_json(const ExperimentConfig& c) {
  json j;
  if (c.sim) {
    j["source"] =
        json{{"type", "sim"}, {"model", c.sim->model_id}, {"n", c.sim->n}, {"p", c.sim->p}};
  } else if (c.csv) {
    j["source"] = json{{"type", "csv"},
                       {"x", c.csv->x_path},
                       {"y", c.csv->y_path},
                       {"subjects", c.csv->subjects_path.empty() ? json() : json(c.csv->subjects_path)},
                       {"has_header", c.csv->has_header},
                       {"test_fraction", c.csv->test_fraction}};
  }
  json methods = json::array();
  for (const Method m : c.methods) methods.push_back(to_string(m));
  j["methods"] = std::move(methods);
  j["k_grid"] = c.k_grid;
  j["lambda_grid"] = c.lambda_grid;
  j["lambda_points"] = c.lambda_points;
  j["folds"] = c.folds;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["scale"] = c.scale;
  j["mse_mode"] = to_string(c.mse_mode);
  j["admm"] = json{{"mu0", c.admm.mu0},
                   {"mu_growth", c.admm.mu_growth},
                   {"eps", c.admm.eps},
                   {"max_iter", c.admm.max_iter},
                   {"dual_rescale", c.admm.dual_rescale}};
  j["l1"] = json{{"kappa", c.l1.kappa}, {"max_outer", c.l1.max_outer}, {"tol", c.l1.tol}};
  j["include_timing"] = c.include_timing;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  try {
    ExperimentConfig c;
    if (j.contains("source") && !j.at("source").is_null()) {
      const json& s = j.at("source");
      const std::string type = s.at("type").get<std::string>();
      if (type == "sim") {
        SimModelSpec spec;
        spec.model_id = s.at("model").get<int>();
        if (s.contains("n")) spec.n = s.at("n").get<Index>();
        if (s.contains("p")) spec.p = s.at("p").get<Index>();
        c.sim = spec;
      } else if (type == "csv") {
        CsvSource src;
        src.x_path = s.at("x").get<std::string>();
        src.y_path = s.at("y").get<std::string>();
        if (s.contains("subjects") && !s.at("subjects").is_null())
          src.subjects_path = s.at("subjects").get<std::string>();
        if (s.contains("has_header")) src.has_header = s.at("has_header").get<bool>();
        if (s.contains("test_fraction")) src.test_fraction = s.at("test_fraction").get<double>();
        c.csv = src;
      } else {
        fail(ErrorCode::parse, "config: unknown source type '" + type + "'");
      }
    }
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(method_from_string(m.get<std::string>()));
    }
    if (j.contains("k_grid")) c.k_grid = j.at("k_grid").get<std::vector<int>>();
    if (j.contains("lambda_grid")) c.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    if (j.contains("lambda_points")) c.lambda_points = j.at("lambda_points").get<int>();
    if (j.contains("folds")) c.folds = j.at("folds").get<int>();
    if (j.contains("trials")) c.trials = j.at("trials").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("scale")) c.scale = j.at("scale").get<bool>();
    if (j.contains("mse_mode")) c.mse_mode = mse_mode_from_string(j.at("mse_mode").get<std::string>());
    if (j.contains("admm")) {
      const json& a = j.at("admm");
      if (a.contains("mu0")) c.admm.mu0 = a.at("mu0").get<double>();
      if (a.contains("mu_growth")) c.admm.mu_growth = a.at("mu_growth").get<double>();
      if (a.contains("eps")) c.admm.eps = a.at("eps").get<double>();
      if (a.contains("max_iter")) c.admm.max_iter = a.at("max_iter").get<int>();
      if (a.contains("dual_rescale")) c.admm.dual_rescale = a.at("dual_rescale").get<bool>();
    }
    if (j.contains("l1")) {
      const json& l = j.at("l1");
      if (l.contains("kappa")) c.l1.kappa = l.at("kappa").get<double>();
      if (l.contains("max_outer")) c.l1.max_outer = l.at("max_outer").get<int>();
      if (l.contains("tol")) c.l1.tol = l.at("tol").get<double>();
    }
    if (j.contains("include_timing")) c.include_timing = j.at("include_timing").get<bool>();
    return c;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string("config: ") + e.what());
  }
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  validate_config(config);

  ExperimentReport report;
  report.config = config;

  std::optional<Dataset> full;
  if (config.csv)
    full = load_dataset_csv(config.csv->x_path, config.csv->y_path, config.csv->has_header,
                            config.csv->subjects_path);
  report.n_variables = config.sim ? config.sim->p : full->p();

  const int trials = config.trials;
  report.trial_seeds.resize(static_cast<size_t>(trials));
  for (int t = 0; t < trials; ++t)
    report.trial_seeds[static_cast<size_t>(t)] = trial_seed(config.seed, t, kTagTrain);

  report.methods.resize(config.methods.size());
  for (size_t mi = 0; mi < config.methods.size(); ++mi) {
    report.methods[mi].method = config.methods[mi];
    report.methods[mi].trials.resize(static_cast<size_t>(trials));
  }

  const int max_k = *std::max_element(config.k_grid.begin(), config.k_grid.end());

  parallel_for(trials, config.threads, [&](int t) {
    Dataset train, test;
    if (config.sim) {
      SimModelSpec spec = *config.sim;
      spec.seed = trial_seed(config.seed, t, kTagTrain);
      train = generate(spec);
      spec.seed = trial_seed(config.seed, t, kTagTest);
      test = generate(spec);
    } else {
      std::vector<Index> train_rows, test_rows;
      split_train_test(full->n(), config.csv->test_fraction,
                       trial_seed(config.seed, t, kTagSplit), full->subject_ids, train_rows,
                       test_rows);
      train = subset(*full, train_rows);
      test = subset(*full, test_rows);
    }
    const uint64_t fold_seed = trial_seed(config.seed, t, kTagFolds);

    for (size_t mi = 0; mi < config.methods.size(); ++mi) {
      TrialRow row;
      row.trial = t;
      const auto started = std::chrono::steady_clock::now();
      try {
        const MethodConfig mc = method_config(config, config.methods[mi]);
        const std::vector<double> grid =
            config.lambda_grid.empty()
                ? default_lambda_grid(train.X, train.Y, mc, max_k, config.lambda_points)
                : config.lambda_grid;
        const CvResult cv = cross_validate(train, mc, config.k_grid, grid, config.folds,
                                           fold_seed, config.mse_mode, 1);
        const SparsePlsModel fit = fit_method(train.X, train.Y, cv.best_k, cv.best_lambda, mc);
        row.best_k = cv.best_k;
        row.best_lambda = cv.best_lambda;
        row.components = fit.model.K;
        row.selected = fit.selected;
        row.selected_count = static_cast<Index>(fit.selected.size());
        row.test_mse = mse(test.Y, predict(fit, test.X), config.mse_mode);
        row.train_r2 = r_squared(train.Y, predict(fit, train.X));
      } catch (const Error& e) {
        row.failed = true;
        row.error = e.what();
      }
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      report.methods[mi].trials[static_cast<size_t>(t)] = std::move(row);
    }
  });

  int successes_total = 0;
  for (MethodSummary& s : report.methods) {
    int n_ok = 0;
    for (const TrialRow& row : s.trials) {
      if (row.failed) {
        s.failures += 1;
        continue;
      }
      n_ok += 1;
      s.mean_components += row.components;
      s.mean_selected += static_cast<double>(row.selected_count);
      s.mean_test_mse += row.test_mse;
      s.mean_train_r2 += row.train_r2;
      s.mean_seconds += row.seconds;
    }
    if (n_ok > 0) {
      s.mean_components /= n_ok;
      s.mean_selected /= n_ok;
      s.mean_test_mse /= n_ok;
      s.mean_train_r2 /= n_ok;
      s.mean_seconds /= n_ok;
    }
    successes_total += n_ok;
  }
  report.all_failed = successes_total == 0;

  for (size_t a = 0; a < report.methods.size(); ++a) {
    for (size_t b = 0; b < report.methods.size(); ++b) {
      if (a == b) continue;
      for (const char* metric : {"test_mse", "selected", "components"}) {
        PairwiseTest pt;
        pt.a = report.methods[a].method;
        pt.b = report.methods[b].method;
        pt.metric = metric;
        std::vector<double> va, vb;
        for (int t = 0; t < trials; ++t) {
          const TrialRow& ra = report.methods[a].trials[static_cast<size_t>(t)];
          const TrialRow& rb = report.methods[b].trials[static_cast<size_t>(t)];
          if (ra.failed || rb.failed) continue;
          va.push_back(metric_of(ra, metric));
          vb.push_back(metric_of(rb, metric));
        }
        pt.pairs = static_cast<int>(va.size());
        if (pt.pairs >= 2) {
          pt.test = paired_t_test_one_sided(va, vb);
          report.t_tests.push_back(std::move(pt));
        }
      }
    }
  }
  return report;
}

json report_json(const ExperimentReport& report) {
  const bool timing = report.config.include_timing;
  json methods = json::object();
  for (const MethodSummary& s : report.methods) {
    json rows = json::array();
    for (const TrialRow& r : s.trials) {
      json row{{"trial", r.trial}, {"failed", r.failed}};
      if (r.failed) {
        row["error"] = r.error;
      } else {
        row["best_k"] = r.best_k;
        row["best_lambda"] = r.best_lambda;
        row["components"] = r.components;
        row["selected"] = r.selected_count;
        row["test_mse"] = r.test_mse;
        row["train_r2"] = r.train_r2;
      }
      if (timing) row["seconds"] = r.seconds;
      rows.push_back(std::move(row));
    }
    json agg{{"trials", static_cast<int>(s.trials.size())},
             {"failures", s.failures},
             {"mean_components", s.mean_components},
             {"mean_selected", s.mean_selected},
             {"mean_test_mse", s.mean_test_mse},
             {"mean_train_r2", s.mean_train_r2}};
    if (timing) agg["mean_seconds"] = s.mean_seconds;
    methods[to_string(s.method)] = json{{"aggregates", std::move(agg)}, {"per_trial", std::move(rows)}};
  }

  json tests = json::array();
  for (const PairwiseTest& pt : report.t_tests) {
    json t{{"a", to_string(pt.a)}, {"b", to_string(pt.b)},   {"metric", pt.metric},
           {"pairs", pt.pairs},    {"df", pt.test.df},       {"p_value", pt.test.p_value}};
    if (std::isfinite(pt.test.statistic))
      t["statistic"] = pt.test.statistic;
    else
      t["statistic"] = pt.test.statistic > 0 ? "inf" : "-inf";
    tests.push_back(std::move(t));
  }

  return json{{"version", kVersion},
              {"config", config_json(report.config)},
              {"n_variables", report.n_variables},
              {"trial_seeds", report.trial_seeds},
              {"all_failed", report.all_failed},
              {"methods", std::move(methods)},
              {"t_tests", std::move(tests)}};
}

std::string report_table(const ExperimentReport& report) {
  const bool timing = report.config.include_timing;
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %10s %10s %10s %11s %9s", "method", "test_mse",
                "train_r2", "selected", "components", "failures");
  out += line;
  if (timing) {
    std::snprintf(line, sizeof(line), " %9s", "seconds");
    out += line;
  }
  out += '\n';
  for (const MethodSummary& s : report.methods) {
    std::snprintf(line, sizeof(line), "%-16s %10s %10s %10s %11s %9d", to_string(s.method).c_str(),
                  fmt4(s.mean_test_mse).c_str(), fmt4(s.mean_train_r2).c_str(),
                  fmt4(s.mean_selected).c_str(), fmt4(s.mean_components).c_str(), s.failures);
    out += line;
    if (timing) {
      std::snprintf(line, sizeof(line), " %9s", fmt4(s.mean_seconds).c_str());
      out += line;
    }
    out += '\n';
  }
  return out;
}

CsvTable selection_frequency(const ExperimentReport& report) {
  const Index p = report.n_variables;
  CsvTable table;
  table.values = Matrix::Zero(p, static_cast<Index>(report.methods.size()) + 1);
  for (Index i = 0; i < p; ++i) table.values(i, 0) = static_cast<double>(i + 1);
  table.names.push_back("variable");
  for (size_t mi = 0; mi < report.methods.size(); ++mi) {
    table.names.push_back(to_string(report.methods[mi].method));
    for (const TrialRow& row : report.methods[mi].trials) {
      if (row.failed) continue;
      for (const Index v : row.selected) table.values(v, static_cast<Index>(mi) + 1) += 1.0;
    }
  }
  return table;
}

}  // namespace spls
