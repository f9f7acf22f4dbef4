#pragma once

#include <optional>

#include "core/types.hpp"

namespace spls {

enum class PlsAlgorithm { nipals, simpls };

// Deflated-space quantities kept by the iterative fit: per-component weights R,
// response weights C, inner regression vectors B, response scores V.
struct NipalsInternals {
  Matrix R;  // p x K
  Matrix C;  // q x K
  Matrix B;  // q x K
  Matrix V;  // n x K
};

struct PlsModel {
  Matrix W;     // p x K weights, T = Xc * W
  Matrix T;     // n x K scores
  Matrix P;     // p x K predictor loadings
  Matrix Q;     // q x K response loadings
  Matrix beta;  // p x q coefficients on centered data
  int K = 0;    // achieved component count
  Centering centering;  // zeros when the model was fit on pre-centered data
  PlsAlgorithm algorithm = PlsAlgorithm::simpls;
  std::optional<NipalsInternals> nipals;
  bool truncated = false;  // extraction stopped before the requested count
};

struct PlsOptions {
  // When set, an unreachable component count raises an error naming the
  // achievable count instead of returning a truncated model.
  bool require_k = false;
  double inner_tol = 1e-10;  // iterative weight-convergence threshold
  int max_inner = 500;
};

// Iterative two-block fit on centered data: per component, alternate
// t = X r, c = Y't (normalized), v = Y c, r = X'v (normalized) to convergence,
// then deflate X by t p' and Y by t b'. Weights W = R (P'R)^{-1}.
PlsModel nipals_pls2(const Matrix& Xc, const Matrix& Yc, int K, const PlsOptions& opts = {});

// Direct fit: each weight maximizes w'Xc'Yc Yc'Xc w over unit vectors
// conjugate (through Xc'Xc) to earlier ones; computed from the q x q Gram
// matrix of the projected cross-product.
PlsModel simpls(const Matrix& Xc, const Matrix& Yc, int K, const PlsOptions& opts = {});

// (Xnew centered/scaled by the stored statistics) * beta + y_mean.
Matrix predict(const PlsModel& model, const Matrix& Xnew);

// Model with zero components: beta = 0, predictions equal y_mean.
PlsModel empty_model(Index p, Index q, PlsAlgorithm algorithm);

}  // namespace spls
