#pragma once

#include <vector>

#include "core/pls.hpp"
#include "core/types.hpp"

namespace spls {

struct AdmmOptions {
  double mu0 = 2000.0;      // initial augmented-penalty weight
  double mu_growth = 1.01;  // per-iteration penalty multiplier
  double eps = 1e-4;        // Frobenius stopping threshold on the split residual
  int max_iter = 500;
  // Rescale the scaled dual variable when the penalty weight grows so the
  // implied unscaled dual stays fixed.  When false, the scaled dual is
  // carried across the growth step unchanged.
  bool dual_rescale = true;
  PlsOptions pls;  // controls the dense refit on the selected columns
};

struct SparseFitDiagnostics {
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  double mu_final = 0.0;
  bool init_truncated = false;   // dense warm start had fewer components than
                                 // requested; missing columns start at zero
  bool total_shrinkage = false;  // thresholding removed every row; the fit
                                 // degenerates to the mean model
};

struct SparsePlsModel {
  // Dense refit restricted to the selected predictor columns, with weights,
  // loadings and coefficients embedded back into the full predictor space.
  PlsModel model;
  Matrix sparse_weights;        // p x K row-sparse weight matrix
  std::vector<Index> selected;  // predictors whose weight row is nonzero
  double lambda = 0.0;
  int requested_k = 0;
  SparseFitDiagnostics diagnostics;
};

// Zeroes every row of A whose Euclidean norm is at most `threshold` and
// shrinks the surviving rows toward zero by `threshold`.  A zero threshold
// returns A unchanged.
Matrix row_soft_threshold(const Matrix& A, double threshold);

// Splitting update: row soft threshold of W - D at lambda / mu.
Matrix update_m(const Matrix& W, const Matrix& D, double lambda, double mu);

// Weight update: each column solves a sphere-constrained quadratic pulled
// toward the matching column of M + D, restricted to the orthogonal
// complement of the preceding columns' covariance-score directions.
Matrix update_w(const Matrix& Xc, const Matrix& Yc, const Matrix& M,
                const Matrix& D, int K, double mu);

// Row-sparse K-component fit on centered data: alternate weight and
// splitting updates under a growing penalty weight, select the predictors
// whose splitting rows stay nonzero, then refit the dense model on them.
SparsePlsModel fit_global_simpls(const Matrix& Xc, const Matrix& Yc, int K,
                                 double lambda, const AdmmOptions& opts = {});

// Smallest penalty that zeroes every row of the first splitting update;
// beyond it the fit collapses to the mean model.
double global_simpls_lambda_max(const Matrix& Xc, const Matrix& Yc, int K,
                                const AdmmOptions& opts = {});

}  // namespace spls
