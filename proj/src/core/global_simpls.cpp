#include "core/global_simpls.hpp"

#include <algorithm>
#include <string>

#include "core/error.hpp"
#include "core/sphere_quad.hpp"

namespace spls {

namespace {

void check_admm_options(const AdmmOptions& opts) {
  if (opts.mu0 <= 0.0) fail(ErrorCode::invalid_argument, "penalty weight must be positive");
  if (opts.mu_growth < 1.0)
    fail(ErrorCode::invalid_argument, "penalty growth factor must be at least 1");
  if (opts.eps <= 0.0) fail(ErrorCode::invalid_argument, "stopping threshold must be positive");
  if (opts.max_iter < 1) fail(ErrorCode::invalid_argument, "iteration cap must be at least 1");
}

void check_fit_shapes(const Matrix& Xc, const Matrix& Yc, int K) {
  if (Xc.rows() != Yc.rows())
    fail(ErrorCode::invalid_argument, "predictor and response row counts differ");
  if (Xc.rows() < 2) fail(ErrorCode::invalid_argument, "need at least two rows");
  if (Xc.cols() < 1 || Yc.cols() < 1)
    fail(ErrorCode::invalid_argument, "need at least one predictor and one response column");
  const Index cap = std::min(Xc.rows(), Xc.cols());
  if (K < 1 || K > cap)
    fail(ErrorCode::invalid_argument,
         "component count " + std::to_string(K) + " outside [1, " + std::to_string(cap) + "]");
}

// Weight update against a precomputed scaled cross-product G = Xc' Yc / n.
Matrix weight_update(const Matrix& Xc, const Matrix& G, const Matrix& M, const Matrix& D, int K,
                     double mu) {
  const Index p = Xc.cols();
  Matrix W(p, K);
  Matrix basis(p, 0);
  for (int k = 0; k < K; ++k) {
    SphereQuadProblem prob =
        make_proximal_subproblem(G, basis, Vector(M.col(k) + D.col(k)), mu);
    if (prob.basis.cols() >= p)
      fail(ErrorCode::numeric,
           "orthogonality constraints exhaust the predictor space at component " +
               std::to_string(k + 1));
    const SecularSolution sol = solve_sphere_quadratic(prob);
    W.col(k) = sol.w;
    GramSchmidtResult ext = gram_schmidt_extend(basis, Vector(Xc.transpose() * (Xc * W.col(k))));
    basis = std::move(ext.basis);
  }
  return W;
}

// Scatter the rows of a column-selected model back into the full space.
PlsModel embed_model(const PlsModel& sub, const std::vector<Index>& selected, Index p) {
  PlsModel out = sub;
  out.W = Matrix::Zero(p, sub.W.cols());
  out.P = Matrix::Zero(p, sub.P.cols());
  out.beta = Matrix::Zero(p, sub.beta.cols());
  for (Index j = 0; j < static_cast<Index>(selected.size()); ++j) {
    out.W.row(selected[static_cast<size_t>(j)]) = sub.W.row(j);
    out.P.row(selected[static_cast<size_t>(j)]) = sub.P.row(j);
    out.beta.row(selected[static_cast<size_t>(j)]) = sub.beta.row(j);
  }
  out.nipals.reset();
  return out;
}

}  // namespace

Matrix row_soft_threshold(const Matrix& A, double threshold) {
  if (threshold < 0.0) fail(ErrorCode::invalid_argument, "threshold must be nonnegative");
  if (threshold == 0.0) return A;
  Matrix out = A;
  for (Index i = 0; i < out.rows(); ++i) {
    const double nrm = out.row(i).norm();
    if (nrm <= threshold)
      out.row(i).setZero();
    else
      out.row(i) *= (nrm - threshold) / nrm;
  }
  return out;
}

Matrix update_m(const Matrix& W, const Matrix& D, double lambda, double mu) {
  if (mu <= 0.0) fail(ErrorCode::invalid_argument, "penalty weight must be positive");
  if (lambda < 0.0) fail(ErrorCode::invalid_argument, "sparsity penalty must be nonnegative");
  if (W.rows() != D.rows() || W.cols() != D.cols())
    fail(ErrorCode::invalid_argument, "weight and dual shapes differ");
  return row_soft_threshold(W - D, lambda / mu);
}

Matrix update_w(const Matrix& Xc, const Matrix& Yc, const Matrix& M, const Matrix& D, int K,
                double mu) {
  check_fit_shapes(Xc, Yc, K);
  if (mu <= 0.0) fail(ErrorCode::invalid_argument, "penalty weight must be positive");
  if (M.rows() != Xc.cols() || M.cols() != K || D.rows() != M.rows() || D.cols() != M.cols())
    fail(ErrorCode::invalid_argument, "splitting and dual shapes must be p x K");
  const Matrix G = Xc.transpose() * Yc / static_cast<double>(Xc.rows());
  return weight_update(Xc, G, M, D, K, mu);
}

SparsePlsModel fit_global_simpls(const Matrix& Xc, const Matrix& Yc, int K, double lambda,
                                 const AdmmOptions& opts) {
  check_fit_shapes(Xc, Yc, K);
  check_admm_options(opts);
  if (lambda < 0.0) fail(ErrorCode::invalid_argument, "sparsity penalty must be nonnegative");

  const Index p = Xc.cols();
  const Index q = Yc.cols();

  SparsePlsModel result;
  result.lambda = lambda;
  result.requested_k = K;

  // Warm start the splitting variable at the dense weights, padding with zero
  // columns when the dense fit stops early.
  PlsOptions warm_opts = opts.pls;
  warm_opts.require_k = false;
  const PlsModel warm = simpls(Xc, Yc, K, warm_opts);
  Matrix M = Matrix::Zero(p, K);
  M.leftCols(warm.K) = warm.W;
  result.diagnostics.init_truncated = warm.K < K;

  Matrix D = Matrix::Zero(p, K);
  Matrix W;
  const Matrix G = Xc.transpose() * Yc / static_cast<double>(Xc.rows());
  double mu = opts.mu0;

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    W = weight_update(Xc, G, M, D, K, mu);
    M = update_m(W, D, lambda, mu);
    result.diagnostics.iterations = iter;
    result.diagnostics.final_residual = (W - M).norm();
    result.diagnostics.mu_final = mu;
    if (M.isZero(0.0)) {
      // The threshold removed every predictor; further iterations would only
      // re-grow rows through the dual term, so stop at the mean model.
      result.diagnostics.total_shrinkage = true;
      break;
    }
    if (result.diagnostics.final_residual < opts.eps) {
      result.diagnostics.converged = true;
      break;
    }
    D -= W - M;
    const double mu_next = mu * opts.mu_growth;
    if (opts.dual_rescale) D *= mu / mu_next;
    mu = mu_next;
  }

  result.sparse_weights = M;
  for (Index i = 0; i < p; ++i)
    if (M.row(i).norm() > 0.0) result.selected.push_back(i);

  if (result.selected.empty()) {
    result.model = empty_model(p, q, PlsAlgorithm::simpls);
    return result;
  }

  Matrix Xsel(Xc.rows(), static_cast<Index>(result.selected.size()));
  for (Index j = 0; j < Xsel.cols(); ++j)
    Xsel.col(j) = Xc.col(result.selected[static_cast<size_t>(j)]);
  const int refit_k =
      static_cast<int>(std::min<Index>(K, std::min(Xsel.rows(), Xsel.cols())));
  PlsModel refit = simpls(Xsel, Yc, refit_k, warm_opts);
  refit.truncated = refit.truncated || refit.K < K;
  result.model = embed_model(refit, result.selected, p);
  return result;
}

double global_simpls_lambda_max(const Matrix& Xc, const Matrix& Yc, int K,
                                const AdmmOptions& opts) {
  check_fit_shapes(Xc, Yc, K);
  check_admm_options(opts);
  PlsOptions warm_opts = opts.pls;
  warm_opts.require_k = false;
  const PlsModel warm = simpls(Xc, Yc, K, warm_opts);
  Matrix M = Matrix::Zero(Xc.cols(), K);
  M.leftCols(warm.K) = warm.W;
  const Matrix D = Matrix::Zero(Xc.cols(), K);
  const Matrix W = update_w(Xc, Yc, M, D, K, opts.mu0);
  double max_norm = 0.0;
  for (Index i = 0; i < W.rows(); ++i) max_norm = std::max(max_norm, W.row(i).norm());
  return opts.mu0 * max_norm;
}

}  // namespace spls
