#include "core/simgen.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/random.hpp"

namespace spls {

namespace {

constexpr uint64_t kStreamIndicators = 1;
constexpr uint64_t kStreamArBlock = 2;
constexpr uint64_t kStreamResponse = 3;
constexpr uint64_t kStreamColumnBase = 16;  // + 1-based column index

void check_spec(const SimModelSpec& spec) {
  if (spec.model_id < 1 || spec.model_id > 4)
    fail(ErrorCode::invalid_argument, "model id must be 1, 2, 3, or 4");
  if (spec.n < 2) fail(ErrorCode::invalid_argument, "need at least two samples");
  if (spec.model_id == 3 && spec.n < 4)
    fail(ErrorCode::invalid_argument, "model 3 needs at least four samples");
  const Index min_p = spec.model_id == 1 ? 50 : (spec.model_id == 4 ? 350 : 300);
  if (spec.p <= min_p)
    fail(ErrorCode::invalid_argument, "model " + std::to_string(spec.model_id) +
                                          " needs more than " + std::to_string(min_p) +
                                          " predictors");
}

Vector uniforms(RandomStream& rs, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rs.uniform01();
  return v;
}

Vector step_latent(Index n, Index split, double low, double high) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = i < split ? low : high;
  return v;
}

Vector indicator_latent(const Vector& u, double base, double bump, double cut) {
  Vector v(u.size());
  for (Index i = 0; i < u.size(); ++i) v[i] = base + (u[i] <= cut ? bump : 0.0);
  return v;
}

}  // namespace

Matrix ar1_covariance_factor(double rho, Index size) {
  if (!(std::abs(rho) < 1.0))
    fail(ErrorCode::invalid_argument, "autoregression coefficient must lie inside (-1, 1)");
  if (size < 1) fail(ErrorCode::invalid_argument, "factor size must be positive");
  Matrix L = Matrix::Zero(size, size);
  const double off = std::sqrt(1.0 - rho * rho);
  for (Index i = 0; i < size; ++i) {
    L(i, 0) = std::pow(rho, static_cast<double>(i));
    for (Index j = 1; j <= i; ++j) L(i, j) = std::pow(rho, static_cast<double>(i - j)) * off;
  }
  return L;
}

Dataset generate(const SimModelSpec& spec) {
  check_spec(spec);
  const Index n = spec.n, p = spec.p;
  const Index half = n / 2, quarter = n / 4;

  // Indicator uniforms are drawn up front in a fixed order so the latent
  // levels do not depend on p.
  Vector u1, u2, u3;
  if (spec.model_id >= 2) {
    RandomStream rs(spec.seed, kStreamIndicators);
    u1 = uniforms(rs, n);
    u2 = uniforms(rs, n);
    u3 = uniforms(rs, n);
  }

  std::vector<Vector> latents;
  std::vector<Index> bounds;  // absolute column boundaries, block b covers [bounds[b], bounds[b+1])
  Index ar_cols = 0;
  Vector beta = Vector::Zero(p);
  double f_sd = 1.0;

  switch (spec.model_id) {
    case 1:
      latents = {step_latent(n, half, 3.0, 4.0), Vector::Constant(n, 3.5)};
      bounds = {0, 50, p};
      beta.head(50).setConstant(1.0 / 25.0);
      f_sd = 1.5;
      break;
    case 2:
      latents = {step_latent(n, half, 2.5, 4.0), indicator_latent(u1, 3.5, 1.5, 0.4),
                 indicator_latent(u2, 3.5, 0.5, 0.7), indicator_latent(u3, 3.5, -1.5, 0.3),
                 Vector::Constant(n, 3.5)};
      bounds = {0, 50, 100, 200, 300, p};
      beta.head(50).setConstant(1.0 / 25.0);
      f_sd = 1.0;
      break;
    case 3: {
      Vector alt(n);
      for (Index i = 0; i < n; ++i) {
        const bool low = i < quarter || (i >= half && i < half + quarter);
        alt[i] = low ? 2.5 : 4.0;
      }
      latents = {step_latent(n, half, 2.5, 4.0), alt, indicator_latent(u1, 3.5, 1.5, 0.4),
                 indicator_latent(u2, 3.5, 0.5, 0.7), indicator_latent(u3, 3.5, -1.5, 0.3),
                 Vector::Constant(n, 3.5)};
      bounds = {0, 25, 50, 100, 200, 300, p};
      beta.head(50).setConstant(1.0 / 25.0);
      f_sd = 1.0;
      break;
    }
    case 4: {
      latents = {step_latent(n, half, 1.0, 6.0), indicator_latent(u1, 3.5, 1.5, 0.4),
                 indicator_latent(u2, 3.5, 0.5, 0.7), indicator_latent(u3, 3.5, -1.5, 0.3),
                 Vector::Constant(n, 3.5)};
      ar_cols = 50;
      bounds = {50, 100, 150, 250, 350, p};
      const double levels[] = {8.0, 6.0, 4.0, 2.0, 1.0};
      for (int b = 0; b < 5; ++b) beta.segment(10 * b, 10).setConstant(levels[b] / 25.0);
      f_sd = 1.5;
      break;
    }
    default: fail(ErrorCode::invalid_argument, "model id must be 1, 2, 3, or 4");
  }

  Matrix X(n, p);
  if (ar_cols > 0) {
    const Matrix L = ar1_covariance_factor(0.9, ar_cols);
    Matrix Z(n, ar_cols);
    RandomStream rs(spec.seed, kStreamArBlock);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < ar_cols; ++j) Z(i, j) = rs.normal();
    X.leftCols(ar_cols) = Z * L.transpose();
  }
  for (size_t b = 0; b + 1 < bounds.size(); ++b) {
    for (Index c = bounds[b]; c < bounds[b + 1]; ++c) {
      RandomStream rs(spec.seed, kStreamColumnBase + static_cast<uint64_t>(c) + 1);
      Vector col(n);
      for (Index i = 0; i < n; ++i) col[i] = latents[b][i] + rs.normal();
      X.col(c) = col;
    }
  }

  Vector noise(n);
  {
    RandomStream rs(spec.seed, kStreamResponse);
    for (Index i = 0; i < n; ++i) noise[i] = f_sd * rs.normal();
  }

  Dataset data;
  data.X = std::move(X);
  data.Y = data.X * beta + noise;
  data.beta_true = Matrix(beta);
  data.x_names.resize(static_cast<size_t>(p));
  for (Index j = 0; j < p; ++j) data.x_names[static_cast<size_t>(j)] = "x" + std::to_string(j + 1);
  data.y_names = {"y1"};
  validate(data);
  return data;
}

}  // namespace spls
