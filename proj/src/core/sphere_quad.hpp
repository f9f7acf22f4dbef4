#pragma once

#include <utility>

#include "core/types.hpp"

namespace spls {

// Minimize  w' A w - 2 b' w  over unit vectors w orthogonal to the columns of
// an orthonormal basis H, where A = quad_coeff * (PG)(PG)' and P = I - HH' is
// the projector onto the orthogonal complement of span(H). The factored form
// keeps every operation at O(p*q) / a q x q solve; nothing p x p is formed.
struct SphereQuadProblem {
  Matrix cross_factor;  // G, p x q
  Matrix basis;         // H, p x r, orthonormal columns (r may be 0)
  Vector linear_term;   // b, ambient coordinates, lies in range(P)
  double mu = 0.0;      // proximity weight the caller folded into linear_term
  double quad_coeff = -1.0;
};

struct GramSchmidtResult {
  Matrix basis;
  bool degenerate = false;  // v was (numerically) inside span(H); basis unchanged
};

// Appends v/||v|| to H after projecting out existing columns (re-orthogonalized
// twice). A residual below 1e-10 * ||v|| flags degeneracy instead of appending.
GramSchmidtResult gram_schmidt_extend(const Matrix& H, const Vector& v);

// Smallest eigenvalue of A restricted to range(P), from the q x q Gram matrix
// of PG. Exactly zero when that Gram matrix is zero.
double min_eig_factored(const SphereQuadProblem& prob);

// g(alpha) = b'(A - alpha I)^{-2} b and its derivative, evaluated through the
// Woodbury form of the resolvent (one q x q solve per application).
// Requires alpha strictly below min_eig_factored(prob).
std::pair<double, double> g_and_gprime(const SphereQuadProblem& prob, double alpha);

// Root of g(alpha) = 1 on (-inf, d_min): safeguarded Newton iteration on
// 1 - g^{-1/2} with a shrinking bracket. Requires the root to exist
// (non-degenerate linear term, not the hard case).
double secular_solve(const SphereQuadProblem& prob);

struct SecularSolution {
  double alpha = 0.0;
  Vector w;                // ambient, unit norm, orthogonal to basis columns
  double objective = 0.0;  // w'Aw - 2 b'w
  bool hard_case = false;
  int iterations = 0;  // secular iterations (0 for hard case / zero b)
};

// Global minimizer. Cases: generic secular root; b = 0 (bottom eigenvector);
// hard case (b orthogonal to the bottom eigenspace with sup g < 1), solved by
// the pseudo-inverse solution plus a bottom-eigenvector component. Sign
// ambiguities resolve by making the first nonzero coordinate of the bottom
// eigenvector positive.
SecularSolution solve_sphere_quadratic(const SphereQuadProblem& prob);

// Subproblem assembly for the alternating scheme: data factor G (already
// scaled), current conjugacy basis H, proximity target omega with weight mu.
// The linear term (mu/2) * P * omega is projected here.
SphereQuadProblem make_proximal_subproblem(const Matrix& G, const Matrix& H, const Vector& omega,
                                           double mu);

}  // namespace spls
