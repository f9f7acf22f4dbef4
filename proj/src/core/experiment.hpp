#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "core/csv.hpp"
#include "core/model_selection.hpp"
#include "core/simgen.hpp"
#include "core/types.hpp"

namespace spls {

struct CsvSource {
  std::string x_path;
  std::string y_path;
  std::string subjects_path;   // optional grouping labels
  bool has_header = true;
  double test_fraction = 0.25;  // held-out share, redrawn each trial
};

struct ExperimentConfig {
  // Exactly one source. The sim seed field is ignored: per-trial seeds
  // derive from `seed`.
  std::optional<SimModelSpec> sim;
  std::optional<CsvSource> csv;
  std::vector<Method> methods;
  std::vector<int> k_grid = {1, 2, 3};
  std::vector<double> lambda_grid;  // empty -> per-method default grid
  int lambda_points = 8;            // size of the default grid
  int folds = 10;
  int trials = 1;
  uint64_t seed = 0;
  int threads = 1;
  bool scale = false;
  MseMode mse_mode = MseMode::mean;
  AdmmOptions admm;
  L1SplsConfig l1;
  bool include_timing = false;  // wall-clock fields break byte-identical reruns
};

// Error{invalid_argument} on inconsistent settings; referenced csv files
// must exist at validation time.
void validate_config(const ExperimentConfig& config);

nlohmann::json config_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

struct TrialRow {
  int trial = 0;
  bool failed = false;
  std::string error;
  int best_k = 0;
  double best_lambda = 0.0;
  int components = 0;  // achieved by the refit
  Index selected_count = 0;
  std::vector<Index> selected;  // in-memory only; feeds frequency counts
  double test_mse = 0.0;
  double train_r2 = 0.0;
  double seconds = 0.0;
};

struct MethodSummary {
  Method method = Method::simpls;
  std::vector<TrialRow> trials;
  // Means over the successful trials (0 when every trial failed).
  double mean_components = 0.0;
  double mean_selected = 0.0;
  double mean_test_mse = 0.0;
  double mean_train_r2 = 0.0;
  double mean_seconds = 0.0;
  int failures = 0;
};

struct PairwiseTest {
  Method a = Method::simpls;
  Method b = Method::simpls;
  std::string metric;  // test_mse | selected | components
  TTestResult test;
  int pairs = 0;  // trials where both methods succeeded
};

struct ExperimentReport {
  ExperimentConfig config;
  Index n_variables = 0;
  std::vector<uint64_t> trial_seeds;
  std::vector<MethodSummary> methods;  // config order
  std::vector<PairwiseTest> t_tests;   // all ordered pairs x metrics
  bool all_failed = false;
};

// Per trial: build (or split off) train and test sets, cross-validate each
// method on the training set, refit at the chosen cell, and score the test
// set. Rows are assembled by trial index, so the report is deterministic
// regardless of scheduling.
ExperimentReport run_experiment(const ExperimentConfig& config);

nlohmann::json report_json(const ExperimentReport& report);

// Fixed-width text rendering of the aggregates at 4 significant digits.
std::string report_table(const ExperimentReport& report);

// Per-variable selection counts over successful trials, one column per
// method, preceded by the 1-based variable index.
CsvTable selection_frequency(const ExperimentReport& report);

}  // namespace spls
