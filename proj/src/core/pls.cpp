#include "core/pls.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"
#include "core/sphere_quad.hpp"

namespace spls {

namespace {

constexpr double kDegenerateCrossRel = 1e-12;  // vs the initial ||Xc'Yc||_F

void check_fit_inputs(const Matrix& Xc, const Matrix& Yc, int K) {
  if (Xc.rows() != Yc.rows()) fail(ErrorCode::invalid_argument, "X and Y row counts differ");
  if (Xc.rows() < 2) fail(ErrorCode::invalid_argument, "fit needs at least 2 rows");
  if (K < 1) fail(ErrorCode::invalid_argument, "component count must be at least 1");
  if (K > Xc.cols() || K > Xc.rows())
    fail(ErrorCode::invalid_argument, "component count " + std::to_string(K) +
                                          " exceeds min(rows, columns) of the predictor block");
}

// Flip so the largest-magnitude entry of key is positive; companions follow.
template <typename... Cols>
void orient(Vector& key, Cols&... companions) {
  Index at = 0;
  key.cwiseAbs().maxCoeff(&at);
  if (key[at] < 0.0) {
    key = -key;
    ((companions = -companions), ...);
  }
}

[[noreturn]] void unreachable_components(int requested, int achieved) {
  fail(ErrorCode::invalid_argument, "requested " + std::to_string(requested) +
                                        " components but only " + std::to_string(achieved) +
                                        " are extractable");
}

// Shared tail: W (or R->W conversion) is done by the caller; here we regress
// the responses on the scores and assemble beta = W * (T'T)^{-1} T'Yc.
void finish_model(PlsModel& model, const Matrix& Yc) {
  if (model.K == 0) {
    model.beta = Matrix::Zero(model.W.rows(), Yc.cols());
    model.Q = Matrix::Zero(Yc.cols(), 0);
    return;
  }
  const Matrix tt = model.T.transpose() * model.T;
  const Matrix qhat_t = tt.ldlt().solve(model.T.transpose() * Yc);  // K x q
  model.Q = qhat_t.transpose();
  model.beta = model.W * qhat_t;
}

}  // namespace

PlsModel empty_model(Index p, Index q, PlsAlgorithm algorithm) {
  PlsModel model;
  model.algorithm = algorithm;
  model.W = Matrix::Zero(p, 0);
  model.T = Matrix::Zero(0, 0);
  model.P = Matrix::Zero(p, 0);
  model.Q = Matrix::Zero(q, 0);
  model.beta = Matrix::Zero(p, q);
  model.K = 0;
  model.centering = Centering::zeros(p, q);
  model.truncated = true;
  return model;
}

PlsModel nipals_pls2(const Matrix& Xc, const Matrix& Yc, int K, const PlsOptions& opts) {
  check_fit_inputs(Xc, Yc, K);
  const Index n = Xc.rows(), p = Xc.cols(), q = Yc.cols();
  const double cross_base = (Xc.transpose() * Yc).norm();

  Matrix X = Xc, Y = Yc;
  Matrix R(p, K), T(n, K), P(p, K), C(q, K), B(q, K), V(n, K);
  int achieved = 0;

  for (int k = 0; k < K; ++k) {
    Index jmax = 0;
    Y.colwise().norm().maxCoeff(&jmax);
    Vector r = X.transpose() * Y.col(jmax);
    if (r.norm() <= kDegenerateCrossRel * cross_base || cross_base == 0.0) break;
    r /= r.norm();

    Vector t(n), c(q), v(n);
    bool converged = false, exhausted = false;
    for (int it = 0; it < opts.max_inner; ++it) {
      t = X * r;
      c = Y.transpose() * t;
      const double cn = c.norm();
      if (cn == 0.0) {
        exhausted = true;  // response block carries no signal for this component
        break;
      }
      c /= cn;
      v = Y * c;
      Vector r_next = X.transpose() * v;
      const double rn = r_next.norm();
      if (rn == 0.0) {
        exhausted = true;
        break;
      }
      r_next /= rn;
      const double delta = (r_next - r).norm();
      r = r_next;
      if (delta < opts.inner_tol) {
        converged = true;
        break;
      }
    }
    if (exhausted) break;
    if (!converged)
      fail(ErrorCode::numeric,
           "weight iteration did not converge for component " + std::to_string(k + 1));

    t = X * r;
    const double tt = t.squaredNorm();
    if (tt <= 0.0) break;
    Vector pk = X.transpose() * t / tt;
    Vector bk = Y.transpose() * t / tt;
    orient(r, t, c, v, pk, bk);
    X -= t * pk.transpose();
    Y -= t * bk.transpose();

    R.col(k) = r;
    T.col(k) = t;
    P.col(k) = pk;
    C.col(k) = c;
    B.col(k) = bk;
    V.col(k) = v;
    ++achieved;
  }

  if (achieved < K && opts.require_k) unreachable_components(K, achieved);
  if (achieved == 0) return empty_model(p, q, PlsAlgorithm::nipals);

  PlsModel model;
  model.algorithm = PlsAlgorithm::nipals;
  model.K = achieved;
  model.truncated = achieved < K;
  model.T = T.leftCols(achieved);
  model.P = P.leftCols(achieved);
  model.centering = Centering::zeros(p, q);
  model.nipals = NipalsInternals{R.leftCols(achieved), C.leftCols(achieved), B.leftCols(achieved),
                                 V.leftCols(achieved)};
  // weights in original coordinates: T = Xc * W with W = R (P'R)^{-1}
  const Matrix pr = model.P.transpose() * model.nipals->R;
  model.W = model.nipals->R * pr.partialPivLu().solve(Matrix::Identity(achieved, achieved));
  finish_model(model, Yc);
  return model;
}

PlsModel simpls(const Matrix& Xc, const Matrix& Yc, int K, const PlsOptions& opts) {
  check_fit_inputs(Xc, Yc, K);
  const Index n = Xc.rows(), p = Xc.cols(), q = Yc.cols();
  const Matrix G = Xc.transpose() * Yc;
  const double cross_base = G.norm();

  Matrix W(p, K), T(n, K), P(p, K);
  Matrix H(p, 0);  // orthonormal basis of span{Xc'Xc w_j}
  int achieved = 0;

  for (int k = 0; k < K; ++k) {
    Matrix PG = G;
    if (H.cols() > 0) {
      PG -= H * (H.transpose() * PG);
      PG -= H * (H.transpose() * PG);
    }
    // dominant direction of (PG)(PG)' through its q x q Gram matrix
    Eigen::SelfAdjointEigenSolver<Matrix> es(PG.transpose() * PG);
    const double s_max = es.eigenvalues()(q - 1);
    if (s_max <= 0.0 || std::sqrt(s_max) <= kDegenerateCrossRel * cross_base) break;
    Vector w = PG * es.eigenvectors().col(q - 1);
    w /= w.norm();

    Vector t = Xc * w;
    const double tt = t.squaredNorm();
    if (tt <= 0.0) break;
    Vector pk = Xc.transpose() * t / tt;
    orient(w, t, pk);
    W.col(k) = w;
    T.col(k) = t;
    P.col(k) = pk;
    ++achieved;

    auto ext = gram_schmidt_extend(H, Xc.transpose() * (Xc * w));
    H = std::move(ext.basis);  // a degenerate extension leaves the span unchanged
  }

  if (achieved < K && opts.require_k) unreachable_components(K, achieved);
  if (achieved == 0) return empty_model(p, q, PlsAlgorithm::simpls);

  PlsModel model;
  model.algorithm = PlsAlgorithm::simpls;
  model.K = achieved;
  model.truncated = achieved < K;
  model.W = W.leftCols(achieved);
  model.T = T.leftCols(achieved);
  model.P = P.leftCols(achieved);
  model.centering = Centering::zeros(p, q);
  finish_model(model, Yc);
  return model;
}

Matrix predict(const PlsModel& model, const Matrix& Xnew) {
  Matrix yhat = apply_centering(model.centering, Xnew) * model.beta;
  yhat.rowwise() += model.centering.y_mean.transpose();
  return yhat;
}

}  // namespace spls
