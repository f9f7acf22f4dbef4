#include "core/sphere_quad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace spls {

namespace {

constexpr double kGramSchmidtTol = 1e-10;      // residual / ||v|| below this = dependent
constexpr double kEigenTieRel = 1e-12;         // relative width of the bottom eigenvalue cluster
constexpr double kHardCaseProjRel = 1e-10;     // ||proj_bottom(b)|| / ||b|| below this = hard-case candidate
constexpr double kSecularResidualTol = 1e-10;  // |g(alpha) - 1| at acceptance
constexpr int kSecularMaxIter = 200;

Vector project_off_basis(const Matrix& H, const Vector& v) {
  if (H.cols() == 0) return v;
  Vector out = v - H * (H.transpose() * v);
  out -= H * (H.transpose() * out);  // second pass keeps orthogonality at fp level
  return out;
}

Matrix project_off_basis(const Matrix& H, const Matrix& M) {
  if (H.cols() == 0) return M;
  Matrix out = M - H * (H.transpose() * M);
  out -= H * (H.transpose() * out);
  return out;
}

// Spectral summary of the restricted operator A = c * B B', B = PG.
struct Factored {
  Matrix pg;        // B
  Matrix gram;      // S = B'B, q x q
  Vector s;         // eigenvalues of S, ascending, clamped at 0
  Matrix s_vecs;    // matching eigenvectors
  double c = -1.0;
  Index comp_dim = 0;  // dim range(P) = p - r
  Index rank = 0;      // numerical rank of B
  double d_min = 0.0;  // smallest eigenvalue of the restricted A
  bool null_space = false;  // restricted A has a zero eigenvalue beyond c*s
};

Factored analyze(const SphereQuadProblem& prob) {
  const Index p = prob.cross_factor.rows();
  const Index q = prob.cross_factor.cols();
  if (prob.basis.rows() != p && prob.basis.cols() != 0)
    fail(ErrorCode::invalid_argument, "basis row count does not match cross factor");
  if (prob.linear_term.size() != p)
    fail(ErrorCode::invalid_argument, "linear term length does not match cross factor");
  if (prob.quad_coeff == 0.0) fail(ErrorCode::invalid_argument, "quadratic coefficient must be nonzero");

  Factored f;
  f.c = prob.quad_coeff;
  f.comp_dim = p - prob.basis.cols();
  f.pg = project_off_basis(prob.basis, prob.cross_factor);
  f.gram = f.pg.transpose() * f.pg;
  Eigen::SelfAdjointEigenSolver<Matrix> es(f.gram);
  f.s = es.eigenvalues().cwiseMax(0.0);
  f.s_vecs = es.eigenvectors();
  const double s_max = f.s.size() ? f.s[q - 1] : 0.0;
  const double rank_tol = s_max * 1e-13;
  for (Index i = 0; i < q; ++i)
    if (f.s[i] > rank_tol) ++f.rank;
  f.null_space = f.comp_dim > f.rank;

  if (f.gram.isZero(0.0)) {
    f.d_min = 0.0;  // exact, not an eigensolver residual
  } else if (f.c < 0.0) {
    f.d_min = f.c * s_max;
  } else {
    f.d_min = f.null_space ? 0.0 : f.c * f.s[q - f.rank];
  }
  return f;
}

// (A - alpha I)^{-1} y on range(P), via the Woodbury identity; the only dense
// solve is q x q. Valid for alpha < d_min (the q x q system is then definite).
Vector resolvent_apply(const Factored& f, double alpha, const Vector& y) {
  const Index q = f.gram.rows();
  const Vector by = f.pg.transpose() * y;
  Matrix K = f.gram / (-alpha);
  K.diagonal().array() += 1.0 / f.c;
  const Vector z = K.ldlt().solve(by);
  return -y / alpha - f.pg * z / (alpha * alpha);
}

std::pair<double, double> g_eval(const Factored& f, const Vector& b, double alpha) {
  if (!(alpha < f.d_min))
    fail(ErrorCode::invalid_argument, "g(alpha) requires alpha strictly below the smallest eigenvalue");
  const Vector u = resolvent_apply(f, alpha, b);
  const Vector u2 = resolvent_apply(f, alpha, u);
  return {u.squaredNorm(), 2.0 * u.dot(u2)};
}

struct SecularRoot {
  double alpha;
  int iterations;
};

SecularRoot secular_root(const Factored& f, const Vector& b) {
  const double bn = b.norm();
  if (bn == 0.0) fail(ErrorCode::invalid_argument, "secular equation needs a nonzero linear term");
  const double d = f.d_min;
  const double eps1 = 1e-3 * std::max(1.0, std::abs(d));
  // g(d - bn - eps1) < 1 always, so the root (when it exists) lies in (lo, d).
  double lo = d - bn - eps1;
  double hi = d;
  double alpha = d - eps1;
  double g = 0.0, gp = 0.0;
  for (int iter = 1; iter <= kSecularMaxIter; ++iter) {
    std::tie(g, gp) = g_eval(f, b, alpha);
    if (std::abs(g - 1.0) <= kSecularResidualTol) return {alpha, iter};
    if (g > 1.0)
      hi = alpha;
    else
      lo = alpha;
    // When the root sits within rounding distance of the spectrum edge, the
    // cancellation in d - alpha keeps |g - 1| above any fixed tolerance even
    // though alpha is exact to the last bit; a collapsed bracket certifies that.
    const double width_tol = 4.0 * std::numeric_limits<double>::epsilon() *
                             std::max({1.0, std::abs(lo), std::abs(hi)});
    if (hi - lo <= width_tol) return {alpha, iter};
    // Newton step on 1 - g^{-1/2}; falls back to bisection when it leaves the bracket
    const double rg = std::sqrt(g);
    double cand = alpha + 2.0 * (1.0 / rg - 1.0) * g * rg / gp;
    if (!(std::isfinite(cand) && cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
    alpha = cand;
  }
  fail(ErrorCode::numeric, "secular iteration cap reached, residual " + std::to_string(g - 1.0));
}

void fix_sign(Vector& v) {
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12 * peak) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

// Unit eigenvector of the restricted A for eigenvalue c*s[i].
Vector spectral_vector(const Factored& f, Index i) {
  Vector u = f.pg * f.s_vecs.col(i);
  u /= std::sqrt(f.s[i]);
  return u;
}

// Deterministic unit vector in range(P) orthogonal to all positive-s spectral
// vectors (the zero eigenspace of the restricted A).
Vector null_space_vector(const SphereQuadProblem& prob, const Factored& f) {
  const Index p = prob.cross_factor.rows();
  const Index q = f.gram.rows();
  for (Index j = 0; j < p; ++j) {
    Vector cand = project_off_basis(prob.basis, Vector(Vector::Unit(p, j)));
    for (Index i = 0; i < q; ++i) {
      if (f.s[i] <= 0.0) continue;
      const Vector u = spectral_vector(f, i);
      cand -= u * u.dot(cand);
    }
    const double nrm = cand.norm();
    if (nrm > 1e-6) {
      cand /= nrm;
      fix_sign(cand);
      return cand;
    }
  }
  fail(ErrorCode::numeric, "could not build a zero-eigenspace direction");
}

}  // namespace

GramSchmidtResult gram_schmidt_extend(const Matrix& H, const Vector& v) {
  if (H.cols() > 0 && H.rows() != v.size())
    fail(ErrorCode::invalid_argument, "basis and vector dimensions differ");
  GramSchmidtResult res;
  const double vn = v.norm();
  Vector w = project_off_basis(H, v);
  const double wn = w.norm();
  if (vn == 0.0 || wn <= kGramSchmidtTol * vn) {
    res.basis = H;
    res.degenerate = true;
    return res;
  }
  res.basis.resize(v.size(), H.cols() + 1);
  if (H.cols() > 0) res.basis.leftCols(H.cols()) = H;
  res.basis.col(H.cols()) = w / wn;
  return res;
}

double min_eig_factored(const SphereQuadProblem& prob) { return analyze(prob).d_min; }

std::pair<double, double> g_and_gprime(const SphereQuadProblem& prob, double alpha) {
  return g_eval(analyze(prob), prob.linear_term, alpha);
}

double secular_solve(const SphereQuadProblem& prob) {
  const Factored f = analyze(prob);
  return secular_root(f, prob.linear_term).alpha;
}

SecularSolution solve_sphere_quadratic(const SphereQuadProblem& prob) {
  const Factored f = analyze(prob);
  const Index q = f.gram.rows();
  if (f.comp_dim <= 0)
    fail(ErrorCode::invalid_argument, "constraint basis exhausts the space; no unit vector remains");
  const Vector& b = prob.linear_term;
  const double bn = b.norm();

  SecularSolution sol;

  const double s_max = f.s[q - 1];
  const double eig_tol = kEigenTieRel * std::max({1.0, std::abs(f.d_min), f.c > 0 ? f.c * s_max : -f.d_min});
  const bool null_is_bottom = f.null_space && f.d_min >= -eig_tol;

  auto bottom_vector = [&]() -> Vector {
    if (f.c < 0.0 && s_max > 0.0) {
      Vector v = spectral_vector(f, q - 1);
      fix_sign(v);
      return v;
    }
    if (f.c > 0.0 && !f.null_space && f.rank > 0) {
      Vector v = spectral_vector(f, q - f.rank);  // smallest positive eigenvalue
      fix_sign(v);
      return v;
    }
    return null_space_vector(prob, f);
  };

  if (bn == 0.0) {
    // constant linear part: any bottom eigenvector minimizes
    sol.alpha = f.d_min;
    sol.hard_case = true;
    sol.w = bottom_vector();
  } else {
    // spectral split of b: coefficients on positive-s eigenvectors + null rest
    Vector coeff = Vector::Zero(q);
    Vector b_perp = b;
    std::vector<Vector> specs(static_cast<size_t>(q));
    for (Index i = 0; i < q; ++i) {
      if (f.s[i] <= 0.0) continue;
      specs[static_cast<size_t>(i)] = spectral_vector(f, i);
      coeff[i] = specs[static_cast<size_t>(i)].dot(b);
      b_perp -= specs[static_cast<size_t>(i)] * coeff[i];
    }

    double proj_bottom_sq = null_is_bottom ? b_perp.squaredNorm() : 0.0;
    for (Index i = 0; i < q; ++i) {
      if (f.s[i] <= 0.0) continue;
      if (std::abs(f.c * f.s[i] - f.d_min) <= eig_tol) proj_bottom_sq += coeff[i] * coeff[i];
    }

    bool hard = false;
    if (std::sqrt(proj_bottom_sq) <= kHardCaseProjRel * bn) {
      const double eps1 = 1e-3 * std::max(1.0, std::abs(f.d_min));
      hard = g_eval(f, b, f.d_min - eps1).first < 1.0;
    }

    if (!hard) {
      const SecularRoot root = secular_root(f, b);
      sol.alpha = root.alpha;
      sol.iterations = root.iterations;
      sol.w = resolvent_apply(f, sol.alpha, b);
      sol.w /= sol.w.norm();
    } else {
      // pseudo-inverse over the non-bottom spectrum, then fill up to unit norm
      // along a bottom eigenvector
      sol.alpha = f.d_min;
      sol.hard_case = true;
      Vector u = Vector::Zero(b.size());
      for (Index i = 0; i < q; ++i) {
        if (f.s[i] <= 0.0) continue;
        const double gap = f.c * f.s[i] - f.d_min;
        if (std::abs(gap) <= eig_tol) continue;
        u += specs[static_cast<size_t>(i)] * (coeff[i] / gap);
      }
      if (f.null_space && !null_is_bottom) u += b_perp / (0.0 - f.d_min);
      const double tau_sq = 1.0 - u.squaredNorm();
      const double tau = tau_sq > 0.0 ? std::sqrt(tau_sq) : 0.0;
      sol.w = u + tau * bottom_vector();
      sol.w /= sol.w.norm();
    }
  }

  sol.objective = f.c * (f.pg.transpose() * sol.w).squaredNorm() - 2.0 * b.dot(sol.w);
  return sol;
}

SphereQuadProblem make_proximal_subproblem(const Matrix& G, const Matrix& H, const Vector& omega,
                                           double mu) {
  if (mu <= 0.0) fail(ErrorCode::invalid_argument, "proximity weight must be positive");
  SphereQuadProblem prob;
  prob.cross_factor = G;
  prob.basis = H;
  prob.linear_term = project_off_basis(H, Vector(0.5 * mu * omega));
  prob.mu = mu;
  prob.quad_coeff = -1.0;
  return prob;
}

}  // namespace spls
