#pragma once

#include <cstdint>

#include "core/types.hpp"

namespace spls {

// Synthetic latent-block regression designs.  Each model builds a small set
// of per-sample hidden levels, assigns predictor columns blockwise as hidden
// level plus unit normal noise, and forms the response from a known sparse
// coefficient vector plus noise.  Block boundaries and coefficients follow
// the published designs at n = 100; step breakpoints scale proportionally
// for other sample counts, and only the final (pure noise) block absorbs a
// different predictor count.
struct SimModelSpec {
  int model_id = 1;   // 1..4
  Index n = 100;      // samples
  Index p = 5000;     // predictors
  uint64_t seed = 0;
};

// Lower-triangular L with L L' equal to the AR(1) covariance rho^|i-j|.
Matrix ar1_covariance_factor(double rho, Index size);

// Deterministic draw of one dataset.  Stream-splitting rule (all streams are
// derived from spec.seed): stream 1 feeds the uniform indicator draws u1, u2,
// u3 (each a full n-vector, in that order); stream 2 feeds the Model-4
// autoregressive block (row-major standard normals); stream 3 feeds the
// response noise; stream 16 + j feeds the noise of predictor column j
// (1-based), so columns keep their draws when p changes.
Dataset generate(const SimModelSpec& spec);

}  // namespace spls
