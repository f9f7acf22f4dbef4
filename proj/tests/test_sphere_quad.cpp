#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "doctest.h"

#include "core/error.hpp"
#include "core/random.hpp"
#include "core/sphere_quad.hpp"
#include "oracles.hpp"

using namespace spls;

namespace {

SphereQuadProblem make_problem(Matrix G, Matrix H, Vector b, double c = -1.0) {
  SphereQuadProblem prob;
  prob.cross_factor = std::move(G);
  prob.basis = std::move(H);
  prob.linear_term = std::move(b);
  prob.mu = 1.0;
  prob.quad_coeff = c;
  return prob;
}

// Factored problem whose dense matrix is diag(-1, -2): G = diag(1, sqrt 2),
// empty basis, quad_coeff -1.
SphereQuadProblem diag_problem(double b0, double b1) {
  Matrix G = Matrix::Zero(2, 2);
  G(0, 0) = 1.0;
  G(1, 1) = std::sqrt(2.0);
  Vector b(2);
  b << b0, b1;
  return make_problem(std::move(G), Matrix(2, 0), std::move(b));
}

// Random factored instance; the cycling index varies shape, constraint
// count, linear-term magnitude, and curvature sign.
SphereQuadProblem random_problem(int idx) {
  RandomStream rng(500 + static_cast<uint64_t>(idx), 1);
  const Index p = 2 + static_cast<Index>(rng.index(7));   // 2..8
  const Index q = 1 + static_cast<Index>(rng.index(2));   // 1..2
  const Index r = static_cast<Index>(rng.index(3)) % p;   // 0..2 constraints

  Matrix G(p, q);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < q; ++j) G(i, j) = rng.normal();

  Matrix H(p, 0);
  if (r > 0) {
    Matrix raw(p, r);
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < r; ++j) raw(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(raw);
    H = Matrix(qr.householderQ()).leftCols(r);
  }

  Vector b_raw(p);
  for (Index i = 0; i < p; ++i) b_raw[i] = rng.normal();
  const double scales[] = {0.0, 0.1, 1.0, 10.0};
  Vector b = b_raw * scales[idx % 4];
  if (H.cols() > 0) b -= H * (H.transpose() * b);

  const double c = idx % 5 == 4 ? 0.5 : -1.0;
  return make_problem(std::move(G), std::move(H), std::move(b), c);
}

double dense_min_eig(const SphereQuadProblem& prob) {
  const oracles::DenseForm form = oracles::dense_restrict(prob);
  Eigen::SelfAdjointEigenSolver<Matrix> es(form.a_tilde);
  return es.eigenvalues()[0];
}

}  // namespace

TEST_CASE("basis extension normalizes, projects, and flags dependence") {
  Vector v(2);
  v << 3, 4;
  const GramSchmidtResult r1 = gram_schmidt_extend(Matrix(2, 0), v);
  CHECK_FALSE(r1.degenerate);
  REQUIRE(r1.basis.cols() == 1);
  CHECK(r1.basis(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(r1.basis(1, 0) == doctest::Approx(0.8).epsilon(1e-12));

  Matrix e1 = Matrix::Zero(3, 1);
  e1(0, 0) = 1.0;
  const GramSchmidtResult r2 = gram_schmidt_extend(e1, Vector(e1.col(0)));
  CHECK(r2.degenerate);
  CHECK(r2.basis.cols() == 1);

  Vector diag(3);
  diag << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  const GramSchmidtResult r3 = gram_schmidt_extend(e1, diag);
  CHECK_FALSE(r3.degenerate);
  REQUIRE(r3.basis.cols() == 2);
  CHECK(std::abs(r3.basis(0, 1)) < 1e-12);
  CHECK(r3.basis(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r3.basis(2, 1)) < 1e-12);

  // appended bases stay orthonormal
  const Matrix gram = r3.basis.transpose() * r3.basis;
  CHECK((gram - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("smallest restricted eigenvalue from the small Gram matrix") {
  // zero cross factor: exactly zero, no rounding
  SphereQuadProblem zero = make_problem(Matrix::Zero(4, 2), Matrix(4, 0), Vector::Zero(4));
  CHECK(min_eig_factored(zero) == 0.0);

  // rank one, no constraints: -||g||^2
  Vector g(3);
  g << 1, 2, 2;
  SphereQuadProblem rank1 = make_problem(Matrix(g), Matrix(3, 0), Vector::Zero(3));
  CHECK(min_eig_factored(rank1) == doctest::Approx(-9.0).epsilon(1e-12));

  // random instances match a dense eigensolver on the restricted matrix
  for (int idx = 0; idx < 12; ++idx) {
    const SphereQuadProblem prob = random_problem(idx);
    const double dense = dense_min_eig(prob);
    const double scale = std::max(1.0, std::abs(dense));
    CHECK(std::abs(min_eig_factored(prob) - dense) < 1e-10 * scale);
  }
}

TEST_CASE("resolvent norm function matches hand values") {
  const SphereQuadProblem prob = diag_problem(2.0, 0.0);
  const auto [g, gp] = g_and_gprime(prob, -3.0);
  CHECK(g == doctest::Approx(1.0).epsilon(1e-12));       // 4 / (-1 + 3)^2
  CHECK(gp == doctest::Approx(1.0).epsilon(1e-12));      // 2 * 4 / (-1 + 3)^3

  const SphereQuadProblem zero_b = diag_problem(0.0, 0.0);
  const auto [g0, gp0] = g_and_gprime(zero_b, -5.0);
  CHECK(g0 == 0.0);
  CHECK(gp0 == 0.0);

  // resolvent undefined at or above the smallest eigenvalue (-2)
  CHECK_THROWS_AS(g_and_gprime(prob, -2.0), Error);
  CHECK_THROWS_AS(g_and_gprime(prob, -1.5), Error);
  CHECK_THROWS_AS(g_and_gprime(prob, 0.0), Error);
}

TEST_CASE("factored resolvent matches the dense inverse") {
  for (int idx = 0; idx < 20; ++idx) {
    const SphereQuadProblem prob = random_problem(idx);
    if (prob.linear_term.norm() == 0.0) continue;
    const oracles::DenseForm form = oracles::dense_restrict(prob);
    const double dmin = dense_min_eig(prob);
    const Index m = form.a_tilde.rows();
    for (double gap : {0.3, 1.0, 7.0}) {
      const double alpha = dmin - gap * std::max(1.0, std::abs(dmin));
      const auto [g, gp] = g_and_gprime(prob, alpha);
      const double g_dense = oracles::dense_g(form, alpha);
      CHECK(std::abs(g - g_dense) < 1e-8 * std::max(1.0, std::abs(g_dense)));
      const Matrix shifted = form.a_tilde - alpha * Matrix::Identity(m, m);
      const Vector u = shifted.fullPivLu().solve(form.b_tilde);
      const double gp_dense = 2.0 * u.dot(shifted.fullPivLu().solve(u));
      CHECK(std::abs(gp - gp_dense) < 1e-8 * std::max(1.0, std::abs(gp_dense)));
    }
  }
}

TEST_CASE("resolvent norm function increases strictly below the spectrum") {
  for (int idx : {2, 3, 6, 7, 10}) {
    const SphereQuadProblem prob = random_problem(idx);
    if (prob.linear_term.norm() == 0.0) continue;
    const double dmin = min_eig_factored(prob);
    const double scale = std::max(1.0, std::abs(dmin));
    double prev = -1.0;
    for (double gap = 5.0; gap > 1e-3; gap *= 0.5) {
      const double g = g_and_gprime(prob, dmin - gap * scale).first;
      CHECK(g > prev);
      prev = g;
    }
  }
}

TEST_CASE("secular root matches hand values") {
  CHECK(secular_solve(diag_problem(2.0, 0.0)) == doctest::Approx(-3.0).epsilon(1e-8));

  // one-dimensional: A = (-2), b = (1) -> alpha = d - |b| = -3
  Matrix G1(1, 1);
  G1 << std::sqrt(2.0);
  Vector b1(1);
  b1 << 1.0;
  const SphereQuadProblem one = make_problem(std::move(G1), Matrix(1, 0), std::move(b1));
  CHECK(secular_solve(one) == doctest::Approx(-3.0).epsilon(1e-8));
}

TEST_CASE("secular root satisfies the norm equation to tolerance") {
  for (int idx = 1; idx < 24; ++idx) {
    if (idx % 4 == 0) continue;  // zero linear term instances have no root
    const SphereQuadProblem prob = random_problem(idx);
    const SecularSolution sol = solve_sphere_quadratic(prob);
    if (sol.hard_case) continue;
    const double alpha = secular_solve(prob);
    const double dmin = min_eig_factored(prob);
    CHECK(alpha < dmin);
    const double g = g_and_gprime(prob, alpha).first;
    CHECK(std::abs(g - 1.0) <= 1e-10);
    CHECK(sol.iterations >= 1);
  }
}

TEST_CASE("solver reproduces the generic hand example") {
  const SecularSolution sol = solve_sphere_quadratic(diag_problem(2.0, 0.0));
  CHECK_FALSE(sol.hard_case);
  CHECK(sol.alpha == doctest::Approx(-3.0).epsilon(1e-8));
  CHECK(sol.w[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(sol.w[1]) < 1e-8);
  CHECK(sol.objective == doctest::Approx(-5.0).epsilon(1e-8));
}

TEST_CASE("solver handles the interior-spectrum (hard) case") {
  // sup g = 0.25 < 1 left of the bottom eigenvalue -2
  const SecularSolution sol = solve_sphere_quadratic(diag_problem(0.5, 0.0));
  CHECK(sol.hard_case);
  CHECK(sol.iterations == 0);
  CHECK(sol.alpha == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(sol.w[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(sol.w[1] == doctest::Approx(std::sqrt(0.75)).epsilon(1e-10));
  CHECK(sol.objective == doctest::Approx(-2.25).epsilon(1e-10));

  // independent check: exhaustive sweep of the unit circle
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = -1.0;
  a(1, 1) = -2.0;
  Vector b(2);
  b << 0.5, 0.0;
  const oracles::CircleSweepResult sweep = oracles::circle_sweep_min(a, b, 100000);
  CHECK(std::abs(sol.objective - sweep.objective) < 1e-9);
}

TEST_CASE("zero linear term returns a deterministic bottom eigenvector") {
  const SecularSolution sol = solve_sphere_quadratic(diag_problem(0.0, 0.0));
  CHECK(sol.hard_case);
  CHECK(sol.iterations == 0);
  CHECK(std::abs(sol.w[0]) < 1e-10);
  CHECK(sol.w[1] == doctest::Approx(1.0).epsilon(1e-10));  // sign fixed
  CHECK(sol.objective == doctest::Approx(-2.0).epsilon(1e-10));
}

TEST_CASE("empty complement is rejected") {
  Matrix G(1, 1);
  G << 1.0;
  Matrix H(1, 1);
  H << 1.0;
  const SphereQuadProblem prob = make_problem(std::move(G), std::move(H), Vector::Zero(1));
  CHECK_THROWS_AS(solve_sphere_quadratic(prob), Error);
}

TEST_CASE("solutions satisfy the optimality contract on random instances") {
  RandomStream sphere_rng(77, 2);
  for (int idx = 0; idx < 32; ++idx) {
    const SphereQuadProblem prob = random_problem(idx);
    const SecularSolution sol = solve_sphere_quadratic(prob);
    const oracles::DenseForm form = oracles::dense_restrict(prob);
    const Index m = form.a_tilde.rows();

    // ambient feasibility
    CHECK(std::abs(sol.w.norm() - 1.0) < 1e-10);
    if (prob.basis.cols() > 0)
      CHECK((prob.basis.transpose() * sol.w).cwiseAbs().maxCoeff() < 1e-8);

    // stationarity in complement coordinates
    const Vector wt = form.basis.transpose() * sol.w;
    const Vector resid = form.a_tilde * wt - sol.alpha * wt - form.b_tilde;
    CHECK(resid.norm() <= 1e-8 * (form.b_tilde.norm() + std::abs(sol.alpha) + 1.0));

    // multiplier below the restricted spectrum
    const double dmin = dense_min_eig(prob);
    CHECK(sol.alpha <= dmin + 1e-10 * std::max(1.0, std::abs(dmin)));

    // objective consistency with the reported vector
    const double obj = wt.dot(form.a_tilde * wt) - 2.0 * form.b_tilde.dot(wt);
    CHECK(std::abs(obj - sol.objective) < 1e-8 * (1.0 + std::abs(obj)));

    // never beaten by random feasible vectors
    double best_random = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 10000; ++s) {
      Vector z(m);
      for (Index i = 0; i < m; ++i) z[i] = sphere_rng.normal();
      z.normalize();
      best_random = std::min(best_random, z.dot(form.a_tilde * z) - 2.0 * form.b_tilde.dot(z));
    }
    CHECK(sol.objective <= best_random + 1e-9 * (1.0 + std::abs(best_random)));

    // never beaten by the exhaustive stationary-point enumeration
    const double oracle = oracles::kkt_sphere_min(form.a_tilde, form.b_tilde);
    CHECK(sol.objective <= oracle + 1e-6);
  }
}

TEST_CASE("generic multiplier equals the leftmost root of the norm equation") {
  for (int idx = 1; idx < 20; ++idx) {
    if (idx % 4 == 0) continue;
    const SphereQuadProblem prob = random_problem(idx);
    const SecularSolution sol = solve_sphere_quadratic(prob);
    if (sol.hard_case) continue;
    const oracles::DenseForm form = oracles::dense_restrict(prob);
    const double dmin = dense_min_eig(prob);
    const double bn = form.b_tilde.norm();
    const double scale = std::max(1.0, std::abs(dmin)) + bn;

    // g is strictly increasing left of dmin, so the root there is unique;
    // bracket and bisect it with the dense evaluator only
    double lo = dmin - bn - scale;
    double hi = dmin - 1e-9 * scale;
    if (oracles::dense_g(form, hi) < 1.0) continue;  // borderline hard case
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (oracles::dense_g(form, mid) < 1.0 ? lo : hi) = mid;
    }
    CHECK(sol.alpha == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-7));
  }
}

TEST_CASE("subproblem assembly projects the pull term") {
  RandomStream rng(9, 3);
  Matrix G(5, 2);
  Vector omega(5);
  Matrix raw(5, 2);
  for (Index i = 0; i < 5; ++i) {
    omega[i] = rng.normal();
    for (Index j = 0; j < 2; ++j) {
      G(i, j) = rng.normal();
      raw(i, j) = rng.normal();
    }
  }
  Eigen::HouseholderQR<Matrix> qr(raw);
  const Matrix H = Matrix(qr.householderQ()).leftCols(2);

  const double mu = 3.5;
  const SphereQuadProblem prob = make_proximal_subproblem(G, H, omega, mu);
  const Vector expected = 0.5 * mu * (omega - H * (H.transpose() * omega));
  CHECK((prob.linear_term - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((H.transpose() * prob.linear_term).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(prob.mu == mu);
  CHECK(prob.quad_coeff == -1.0);

  CHECK_THROWS_AS(make_proximal_subproblem(G, H, omega, 0.0), Error);
  CHECK_THROWS_AS(make_proximal_subproblem(G, H, omega, -1.0), Error);
}

TEST_CASE("successive directions stay conjugate through the data Gram matrix") {
  RandomStream rng(31, 0);
  const Index n = 20, p = 6, q = 2;
  Matrix Xc(n, p), Yc(n, q);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) Xc(i, j) = rng.normal();
    for (Index j = 0; j < q; ++j) Yc(i, j) = rng.normal();
  }
  Xc.rowwise() -= Xc.colwise().mean();
  Yc.rowwise() -= Yc.colwise().mean();
  const Matrix G = Xc.transpose() * Yc / static_cast<double>(n);
  const Matrix SX = Xc.transpose() * Xc;

  Matrix H(p, 0);
  std::vector<Vector> dirs;
  for (int k = 0; k < 3; ++k) {
    Vector omega(p);
    for (Index i = 0; i < p; ++i) omega[i] = rng.normal();
    const SecularSolution sol = solve_sphere_quadratic(make_proximal_subproblem(G, H, omega, 2.0));
    for (const Vector& prev : dirs)
      CHECK(std::abs(sol.w.dot(SX * prev)) <= 1e-6 * SX.norm());
    dirs.push_back(sol.w);
    const GramSchmidtResult ext = gram_schmidt_extend(H, Vector(SX * sol.w));
    REQUIRE_FALSE(ext.degenerate);
    H = ext.basis;
  }
}
