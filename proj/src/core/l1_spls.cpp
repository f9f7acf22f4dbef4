#include "core/l1_spls.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "core/error.hpp"
#include "core/sphere_quad.hpp"

namespace spls {

namespace {

constexpr double kDegenerateCrossRel = 1e-12;  // exhausted-signal threshold

void check_l1_config(const L1SplsConfig& config) {
  if (!(config.kappa > 0.0 && config.kappa < 0.5))
    fail(ErrorCode::invalid_argument, "mixing weight must lie strictly inside (0, 0.5)");
  if (config.max_outer < 1) fail(ErrorCode::invalid_argument, "alternation cap must be at least 1");
  if (config.tol <= 0.0) fail(ErrorCode::invalid_argument, "stopping threshold must be positive");
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

// Dominant direction of G G': leading eigenvector of the small Gram G' G
// mapped back through G and normalized.
bool dominant_direction(const Matrix& G, double cross_base, Vector& w) {
  if (G.norm() <= kDegenerateCrossRel * std::max(1.0, cross_base)) return false;
  const Matrix S = G.transpose() * G;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  if (eig.info() != Eigen::Success)
    fail(ErrorCode::numeric, "eigendecomposition of the response-side Gram failed");
  const Index top = S.cols() - 1;
  Vector cand = G * eig.eigenvectors().col(top);
  const double nrm = cand.norm();
  if (nrm <= kDegenerateCrossRel * std::max(1.0, cross_base)) return false;
  w = cand / nrm;
  // Orient deterministically: make the largest-magnitude entry positive.
  Index at = 0;
  w.cwiseAbs().maxCoeff(&at);
  if (w[at] < 0.0) w = -w;
  return true;
}

double soft(double v, double t) {
  const double mag = std::abs(v) - t;
  return mag > 0.0 ? (v < 0.0 ? -mag : mag) : 0.0;
}

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

SparsePlsModel fit_l1_spls(const Matrix& Xc, const Matrix& Yc, int K, double lambda1,
                           const L1SplsConfig& config) {
  check_fit_shapes(Xc, Yc, K);
  check_l1_config(config);
  if (lambda1 < 0.0) fail(ErrorCode::invalid_argument, "sparsity penalty must be nonnegative");

  const Index p = Xc.cols();
  const Index q = Yc.cols();
  const double kappa = config.kappa;
  const double cross_base = (Xc.transpose() * Yc).norm();

  SparsePlsModel result;
  result.lambda = lambda1;
  result.requested_k = K;
  result.diagnostics.converged = true;

  std::vector<bool> in_support(static_cast<size_t>(p), false);
  Matrix Z = Matrix::Zero(p, K);  // surrogate directions, one column per component
  Matrix Xd = Xc;

  for (int k = 0; k < K; ++k) {
    const Matrix G = Xd.transpose() * Yc;
    Vector w;
    if (!dominant_direction(G, cross_base, w)) break;  // signal exhausted

    Vector z = Vector::Zero(p);
    bool component_converged = false;
    for (int it = 0; it < config.max_outer; ++it) {
      const Vector grad = 2.0 * (1.0 - kappa) * (G * (G.transpose() * w));
      for (Index j = 0; j < p; ++j) z[j] = soft(grad[j], lambda1);
      if (z.isZero(0.0)) break;  // threshold removed every entry

      SphereQuadProblem prob;
      prob.cross_factor = G;
      prob.basis = Matrix(p, 0);
      prob.linear_term = (1.0 - kappa) * (G * (G.transpose() * z));
      prob.quad_coeff = 1.0 - 2.0 * kappa;
      const SecularSolution sol = solve_sphere_quadratic(prob);
      const double delta = (sol.w - w).norm();
      w = sol.w;
      result.diagnostics.iterations += 1;
      if (delta < config.tol) {
        component_converged = true;
        break;
      }
    }

    if (z.isZero(0.0)) break;  // nothing survives; later components would repeat
    if (!component_converged) result.diagnostics.converged = false;
    Z.col(k) = z;
    for (Index j = 0; j < p; ++j)
      if (z[j] != 0.0) in_support[static_cast<size_t>(j)] = true;

    // Deflate the predictors by the fitted score so the next component works
    // in the residual space; the responses stay fixed.
    const Vector t = Xd * w;
    const double tt = t.squaredNorm();
    if (tt <= 0.0) break;
    Xd -= t * (Xd.transpose() * t).transpose() / tt;
  }

  result.sparse_weights = Z;
  for (Index j = 0; j < p; ++j)
    if (in_support[static_cast<size_t>(j)]) result.selected.push_back(j);

  if (result.selected.empty()) {
    result.diagnostics.total_shrinkage = true;
    result.model = empty_model(p, q, PlsAlgorithm::simpls);
    return result;
  }

  Matrix Xsel(Xc.rows(), static_cast<Index>(result.selected.size()));
  for (Index j = 0; j < Xsel.cols(); ++j)
    Xsel.col(j) = Xc.col(result.selected[static_cast<size_t>(j)]);
  PlsOptions refit_opts = config.pls;
  refit_opts.require_k = false;
  const int refit_k =
      static_cast<int>(std::min<Index>(K, std::min(Xsel.rows(), Xsel.cols())));
  PlsModel refit = simpls(Xsel, Yc, refit_k, refit_opts);
  refit.truncated = refit.truncated || refit.K < K;
  result.model = embed_model(refit, result.selected, p);
  return result;
}

double l1_spls_lambda_max(const Matrix& Xc, const Matrix& Yc, double kappa) {
  check_fit_shapes(Xc, Yc, 1);
  if (!(kappa > 0.0 && kappa < 0.5))
    fail(ErrorCode::invalid_argument, "mixing weight must lie strictly inside (0, 0.5)");
  const Matrix G = Xc.transpose() * Yc;
  Vector w;
  if (!dominant_direction(G, G.norm(), w)) return 0.0;
  const Vector grad = 2.0 * (1.0 - kappa) * (G * (G.transpose() * w));
  return grad.cwiseAbs().maxCoeff();
}

}  // namespace spls
