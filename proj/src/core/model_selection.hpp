#pragma once

#include <string>
#include <vector>

#include "core/global_simpls.hpp"
#include "core/l1_spls.hpp"
#include "core/pls.hpp"
#include "core/types.hpp"

namespace spls {

enum class MseMode { mean, sum };

MseMode mse_mode_from_string(const std::string& name);
std::string to_string(MseMode mode);

// Squared prediction error: `mean` averages over every cell, `sum` adds the
// per-response column means (q times the `mean` value).
double mse(const Matrix& Y, const Matrix& Yhat, MseMode mode = MseMode::mean);

// Fraction of response variance captured, pooled across responses.
double r_squared(const Matrix& Y, const Matrix& Yhat);

// Lower-tail Student-t distribution function via the regularized incomplete
// beta function.
double student_t_cdf(double x, double df);

struct TTestResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

// Paired one-sided test of H1: mean(a) < mean(b).  With zero-variance
// differences the p-value degenerates to 0, 1, or 0.5 by the sign of the
// mean difference.
TTestResult paired_t_test_one_sided(const std::vector<double>& a, const std::vector<double>& b);

enum class Method { nipals, simpls, global_simpls, l1_spls };

Method method_from_string(const std::string& name);
std::string to_string(Method method);

struct MethodConfig {
  Method method = Method::global_simpls;
  bool scale = false;  // divide predictor and response columns by their sd
  AdmmOptions admm;
  L1SplsConfig l1;
  PlsOptions pls;  // dense fits
};

// Uniform fit entry point: centers (and optionally scales) the data, runs the
// requested method, and returns a model that predicts from raw inputs.
// Dense methods ignore lambda and report every predictor as selected.
SparsePlsModel fit_method(const Matrix& X, const Matrix& Y, int k, double lambda,
                          const MethodConfig& config);

Matrix predict(const SparsePlsModel& fit, const Matrix& Xnew);

struct CvResult {
  int best_k = 0;
  double best_lambda = 0.0;
  std::vector<int> k_grid;
  std::vector<double> lambda_grid;
  Matrix mean_mse;               // k_grid.size() x lambda_grid.size()
  std::vector<Matrix> fold_mse;  // one matrix per fold, same shape
  FoldAssignment folds;
};

// Grid-searched k-fold cross validation.  Each fold refits from scratch on
// its training rows (centering included), scores the held-out rows, and a
// failed or empty fit falls back to the training-mean predictor.  Ties are
// broken toward fewer components, then toward the stronger penalty.
CvResult cross_validate(const Dataset& data, const MethodConfig& config,
                        const std::vector<int>& k_grid, const std::vector<double>& lambda_grid,
                        int n_folds, uint64_t seed, MseMode mse_mode = MseMode::mean,
                        int threads = 1);

// Log-spaced penalty grid anchored at the method's largest useful penalty for
// the largest component count; dense methods get the single value 0.
std::vector<double> default_lambda_grid(const Matrix& X, const Matrix& Y,
                                        const MethodConfig& config, int max_k, int n_points = 8);

}  // namespace spls
