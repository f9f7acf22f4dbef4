#pragma once

#include "core/global_simpls.hpp"
#include "core/pls.hpp"
#include "core/types.hpp"

namespace spls {

struct L1SplsConfig {
  // Mixing weight between the covariance objective and the surrogate
  // direction; must lie strictly inside (0, 0.5).
  double kappa = 0.5 - 1e-6;
  int max_outer = 100;   // alternation cap per component
  double tol = 1e-6;     // weight-change stopping threshold
  PlsOptions pls;        // controls the dense refit on the selected columns
};

// Entrywise-sparse fit on centered data: per component, alternate an exact
// soft-threshold surrogate update with an exact sphere-constrained quadratic
// weight update, deflate the predictors by the fitted score, pool the
// surrogate supports, then refit the dense model on the pooled columns.
SparsePlsModel fit_l1_spls(const Matrix& Xc, const Matrix& Yc, int K, double lambda1,
                           const L1SplsConfig& config = {});

// Smallest penalty that zeroes the first surrogate update entirely.
double l1_spls_lambda_max(const Matrix& Xc, const Matrix& Yc, double kappa = 0.5 - 1e-6);

}  // namespace spls
